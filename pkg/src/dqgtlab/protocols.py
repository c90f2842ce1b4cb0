"""Control schedules: a :class:`Path` paired with a timing map s -> u."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .geometry import DEFAULT_TOL, Path, length_quadrature, rate_along
from .hamiltonians import IsingChain
from .quadrature import _gk15


class TrivialProtocolWarning(UserWarning):
    """The protocol does not move through parameter space."""


class Timing:
    """Strictly increasing map s -> u on [0, 1] with exact endpoints."""

    def __init__(self, func: Callable, deriv: Callable, label: str = ""):
        self._func = func
        self._deriv = deriv
        self.label = label

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        s = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), 0.0, 1.0)
        u = np.clip(np.asarray(self._func(s), dtype=float), 0.0, 1.0)
        u = np.where(s == 0.0, 0.0, np.where(s == 1.0, 1.0, u))
        return float(u[0]) if scalar else u

    def derivative(self, s):
        scalar = np.ndim(s) == 0
        s = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), 0.0, 1.0)
        d = np.asarray(self._deriv(s), dtype=float)
        return float(d[0]) if scalar else d


IDENTITY_TIMING = Timing(lambda s: s, np.ones_like, label="identity")


@dataclass(frozen=True)
class Protocol:
    path: Path
    timing: Timing
    label: str = ""

    def __call__(self, s):
        return self.path(self.timing(s))

    def velocity(self, s):
        """d lam / ds."""
        u = self.timing(s)
        du = self.timing.derivative(s)
        v = self.path.derivative(u)
        return v * du if np.ndim(s) == 0 else v * np.asarray(du)[:, None]

    @property
    def dim(self):
        return self.path.dim


def linear_protocol(start, end, label: str = "linear") -> Protocol:
    """lam(s) = (1 - s) start + s end."""
    start = np.atleast_1d(np.asarray(start, dtype=float))
    end = np.atleast_1d(np.asarray(end, dtype=float))
    if np.array_equal(start, end):
        warnings.warn("linear protocol with identical endpoints does not move", TrivialProtocolWarning, stacklevel=2)
    return Protocol(Path.linear(start, end), IDENTITY_TIMING, label)


def lz_optimal_protocol(lam0: float, s):
    """Closed-form constant-rate Landau-Zener schedule from -lam0 to +lam0."""
    s = np.asarray(s, dtype=float)
    return -lam0 * (1 - 2 * s) / np.sqrt(1 + 4 * lam0**2 * s * (1 - s))


def lz_optimal(lam0: float) -> Protocol:
    """:func:`lz_optimal_protocol` as a timing on the straight path -lam0 -> lam0."""
    if not lam0 > 0:
        raise ValueError(f"lam0 must be positive, got {lam0}")

    def timing(s):
        return (lz_optimal_protocol(lam0, s) + lam0) / (2 * lam0)

    def deriv(s):
        # d lam / ds = 2 lam0 (1 + lam0^2) / D^{3/2}
        D = 1 + 4 * lam0**2 * s * (1 - s)
        return (1 + lam0**2) / D**1.5

    return Protocol(Path.linear([-lam0], [lam0]), Timing(timing, deriv, "lz-optimal"), "optimal")


class ConstantRateTiming(Timing):
    """Inverse of the normalised cumulative length u -> L(u) / L.

    Nodes come from the adaptive length quadrature. The inverse is a cubic
    Hermite spline in s whose slopes L / rate(u_j) are exact at the nodes;
    intervals are split until a midpoint check against the true cumulative
    length is within ``u_tol``. The derivative is evaluated as L / rate(u(s))
    rather than by differentiating the spline.
    """

    def __init__(self, model, path: Path, n: int = 0, tol: float = DEFAULT_TOL,
                 u_tol: float = 1e-11, initial: int = 8, max_rounds: int = 60):
        res = length_quadrature(model, path, n, tol, initial)
        u_nodes = res.breakpoints.copy()
        ell = res.cumulative()
        self.length = float(res.value)

        def rate(u):
            return rate_along(model, path, u, n)

        rates = rate(u_nodes)
        if np.any(rates <= 0):
            j = int(np.argmin(rates))
            raise ValueError(f"rate vanishes at u={u_nodes[j]:.6g}; constant-rate timing is singular there")
        L = self.length
        history = []
        for _ in range(max_rounds):
            spline = CubicHermiteSpline(ell / L, u_nodes, L / rates)
            s_mid = 0.5 * (ell[:-1] + ell[1:]) / L
            u_pred = np.clip(spline(s_mid), u_nodes[:-1], u_nodes[1:])
            partial, _ = _gk15(rate, u_nodes[:-1], u_pred)
            ell_pred = ell[:-1] + partial
            r_pred = rate(u_pred)
            du = (ell_pred - s_mid * L) / r_pred
            bad = np.abs(du) > u_tol
            history.append((len(u_nodes), float(np.abs(du).max())))
            if not bad.any():
                break
            u_nodes = np.concatenate([u_nodes, u_pred[bad]])
            ell = np.concatenate([ell, ell_pred[bad]])
            rates = np.concatenate([rates, r_pred[bad]])
            order = np.argsort(u_nodes, kind="stable")
            u_nodes, ell, rates = u_nodes[order], ell[order], rates[order]
        else:
            raise RuntimeError(f"timing inversion did not settle: {history[-3:]}")
        ell[-1] = L
        self.history = history
        self.nodes = u_nodes
        self._spline = CubicHermiteSpline(ell / L, u_nodes, L / rates)
        probe = self._spline(np.linspace(0, 1, 20001))
        if np.any(np.diff(probe) <= 0):
            raise RuntimeError("constant-rate timing is not strictly increasing")

        def deriv(s):
            # exact slope of the inverse map, du/ds = L / rate(u(s))
            return L / rate(np.clip(self._spline(s), 0.0, 1.0))

        super().__init__(self._spline, deriv, label="constant-rate")


def constant_rate_reparametrize(model, path: Path, n: int = 0, tol: float = DEFAULT_TOL,
                                label: str = "optimal") -> Protocol:
    """Retime ``path`` so the overall non-adiabatic rate is constant in s."""
    probe = rate_along(model, path, np.linspace(0, 1, 33), n)
    if not np.any(probe > 0):
        warnings.warn("path has zero adiabatic length; returning identity timing",
                      TrivialProtocolWarning, stacklevel=2)
        return Protocol(path, IDENTITY_TIMING, label)
    return Protocol(path, ConstantRateTiming(model, path, n, tol), label)


def ising_optimal_protocol_finite(N: int, J: float, lam_start: float, lam_end: float,
                                  grid: int = 8, tol: float = DEFAULT_TOL) -> Protocol:
    """Constant-rate schedule for the finite Ising chain on a straight lam interval.

    The rate is the root of the summed per-mode squared rates, so the
    optimality condition lam'^2 sum_k sin^2 k / r_k^6 = const holds.
    ``grid`` sets the initial number of quadrature panels.
    """
    chain = IsingChain(N, J)
    path = Path.linear([lam_start], [lam_end])
    if lam_start == lam_end:
        warnings.warn("Ising protocol with identical endpoints", TrivialProtocolWarning, stacklevel=2)
        return Protocol(path, IDENTITY_TIMING, "optimal")
    timing = ConstantRateTiming(chain, path, 0, tol, initial=grid)
    return Protocol(path, timing, f"optimal-N{N}")


_THERMO_REGIONS = {"lower": (1.0, np.inf), "inner": (-np.inf, np.inf), "upper": (1.0, np.inf)}


def ising_optimal_protocol_thermo(region: str, s):
    """Infinite-chain constant-rate schedule within one phase.

    ``region`` is ``"lower"`` (lam < -1), ``"inner"`` (-1 < lam < 1) or
    ``"upper"`` (lam > 1). The outer branches are defined for s > 1 and the
    inner one for all real s; the constant is absorbed into s.
    """
    if region not in _THERMO_REGIONS:
        raise ValueError(f"unknown region {region!r}; expected one of {sorted(_THERMO_REGIONS)}")
    s = np.asarray(s, dtype=float)
    if region != "inner" and np.any(s <= _THERMO_REGIONS[region][0]):
        raise ValueError(f"region {region!r} requires s > 1")
    if region == "inner":
        return s / np.sqrt(1 + s**2)
    out = s / np.sqrt(s**2 - 1)
    return -out if region == "lower" else out


def sphere_circle_paths() -> tuple[Path, Path]:
    """(small circle, large circle) on the unit sphere between (+-1/sqrt2, 0, 1/sqrt2)."""
    c = np.sqrt(2) / 2

    def small(u):
        return c * np.stack([np.cos(np.pi * u), np.sin(np.pi * u), np.ones_like(u)], axis=1)

    def small_v(u):
        return c * np.pi * np.stack([-np.sin(np.pi * u), np.cos(np.pi * u), np.zeros_like(u)], axis=1)

    def large(u):
        a = np.pi * (1 - 2 * u) / 4
        return np.stack([np.sin(a), np.zeros_like(u), np.cos(a)], axis=1)

    def large_v(u):
        a = np.pi * (1 - 2 * u) / 4
        return -np.pi / 2 * np.stack([np.cos(a), np.zeros_like(u), -np.sin(a)], axis=1)

    origin = [np.zeros(3)]
    return (
        Path(small, small_v, 3, singular_points=origin, margin=0.5, label="small"),
        Path(large, large_v, 3, singular_points=origin, margin=0.5, label="large"),
    )


def sample_protocol(protocol: Protocol, samples: int = 1001):
    s = np.linspace(0.0, 1.0, samples)
    return s, protocol(s)


def write_protocol_csv(protocol: Protocol, filename, samples: int = 1001):
    """Write ``s,lambda_1[,lambda_2,lambda_3]`` rows."""
    s, lam = sample_protocol(protocol, samples)
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s"] + [f"lambda_{i + 1}" for i in range(lam.shape[1])])
        for si, row in zip(s, lam):
            writer.writerow([repr(float(si))] + [repr(float(x)) for x in row])


def read_protocol_csv(filename, label: str = "file") -> Protocol:
    """Load a tabulated protocol; interpolation is monotone (PCHIP) per component."""
    with open(filename, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{filename}: empty protocol file")
    header = [h.strip() for h in rows[0]]
    expected = ["s"] + [f"lambda_{i + 1}" for i in range(len(header) - 1)]
    if header != expected or not 2 <= len(header) <= 4:
        raise ValueError(f"{filename}: header must be s,lambda_1[,lambda_2,lambda_3], got {header}")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    if len(data) < 2:
        raise ValueError(f"{filename}: need at least two rows")
    s, lam = data[:, 0], data[:, 1:]
    if np.any(np.diff(s) <= 0):
        raise ValueError(f"{filename}: s column must be strictly increasing")
    if s[0] != 0.0 or s[-1] != 1.0:
        raise ValueError(f"{filename}: s must run from 0 to 1")
    interp = PchipInterpolator(s, lam, axis=0)
    path = Path(interp, interp.derivative(), lam.shape[1], label=label)
    return Protocol(path, IDENTITY_TIMING, label)
