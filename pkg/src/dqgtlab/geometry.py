"""Dynamical quantum geometric tensor, transition rates and adiabatic lengths.

The metric for level ``n`` is

    g_ij = Re sum_{l != n} <l|dH_i|n><n|dH_j|l> / (E_n - E_l)^4

and the adiabatic length of a path is the integral of sqrt(lam' g lam')
along it. Lengths carry time units (hbar = 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .hamiltonians import (
    DegenerateSpectrumError,
    IsingChain,
    IsingMode,
    ParamHamiltonian,
    eigensystems,
)
from .quadrature import QuadratureError, integrate

DEFAULT_TOL = 1e-8


class DivergentLengthError(ValueError):
    """The requested length runs through a point where the metric diverges."""


class PathClearanceError(ValueError):
    """A path passes closer to a declared singular point than allowed."""


@dataclass(frozen=True)
class MetricTensor:
    point: np.ndarray
    matrix: np.ndarray


class Path:
    """Curve u -> lam(u) on u in [0, 1] with an analytic derivative.

    ``point`` and ``velocity`` take a 1-D array of u values and return
    ``(M, d)`` arrays. Calling the path with a scalar returns a ``(d,)`` vector.
    """

    def __init__(
        self,
        point: Callable[[np.ndarray], np.ndarray],
        velocity: Callable[[np.ndarray], np.ndarray],
        dim: int,
        singular_points: Sequence = (),
        margin: float = 0.0,
        label: str = "",
    ):
        self._point = point
        self._velocity = velocity
        self.dim = dim
        self.singular_points = [np.atleast_1d(np.asarray(p, dtype=float)) for p in singular_points]
        self.margin = margin
        self.label = label

    def _eval(self, fn, u):
        scalar = np.ndim(u) == 0
        out = np.asarray(fn(np.atleast_1d(np.asarray(u, dtype=float))), dtype=float)
        out = out.reshape(-1, self.dim)
        return out[0] if scalar else out

    def __call__(self, u):
        return self._eval(self._point, u)

    def derivative(self, u):
        return self._eval(self._velocity, u)

    @property
    def start(self):
        return self(0.0)

    @property
    def end(self):
        return self(1.0)

    @classmethod
    def linear(cls, start, end, **kwargs):
        start = np.atleast_1d(np.asarray(start, dtype=float))
        end = np.atleast_1d(np.asarray(end, dtype=float))
        delta = end - start

        def point(u):
            # written as a blend so both endpoints are reproduced exactly
            return (1 - u)[:, None] * start[None, :] + u[:, None] * end[None, :]

        def velocity(u):
            return np.broadcast_to(delta, (len(u), len(delta)))

        return cls(point, velocity, len(start), **kwargs)

    @classmethod
    def hermite(cls, knots, points, tangents, **kwargs):
        """Piecewise cubic through ``points`` with prescribed ``tangents`` at ``knots``."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        spline = CubicHermiteSpline(knots, points, np.asarray(tangents, dtype=float).reshape(points.shape))
        deriv = spline.derivative()
        return cls(spline, deriv, points.shape[1], **kwargs)

    def check_clearance(self, samples: int = 2001):
        """Raise if the path comes within ``margin`` of a declared singular point."""
        if not self.singular_points:
            return
        pts = self(np.linspace(0, 1, samples))
        for p in self.singular_points:
            dist = np.linalg.norm(pts - p[None, :], axis=1)
            j = int(np.argmin(dist))
            if dist[j] <= self.margin:
                raise PathClearanceError(
                    f"path passes within {dist[j]:.3g} of singular point {p} at u={j / (samples - 1):.4g}"
                )


def _metric_weights(energies, n):
    diff = energies[:, n, None] - energies
    with np.errstate(divide="ignore"):
        w = 1.0 / diff**4
    w[:, n] = 0.0
    return w


def dqgt_many(model: ParamHamiltonian, lams, n: int = 0) -> np.ndarray:
    """Metric tensor at each row of ``lams`` straight from the matrix-element sum."""
    lams = np.asarray(lams, dtype=float).reshape(-1, model.param_count)
    energies, states = eigensystems(model, lams, levels=(n,))
    w = _metric_weights(energies, n)
    cols = []
    for i in range(model.param_count):
        dH = model.derivative_many(lams, i)
        # <l| dH_i |n> for all l
        cols.append(np.einsum("mal,mab,mb->ml", states.conj(), dH, states[:, :, n]))
    A = np.stack(cols, axis=-1)  # (M, d, p)
    g = np.einsum("ml,mli,mlj->mij", w, A, A.conj()).real
    return 0.5 * (g + np.swapaxes(g, 1, 2))


def dqgt(model: ParamHamiltonian, lam, n: int = 0) -> MetricTensor:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return MetricTensor(lam, dqgt_many(model, lam, n)[0])


def _rate_squared_many(model, lams, velocities, n):
    """lam' g lam' for each row, using per-mode closed forms where available."""
    lams = np.asarray(lams, dtype=float).reshape(-1, model.param_count)
    velocities = np.asarray(velocities, dtype=float).reshape(-1, model.param_count)
    if isinstance(model, IsingChain):
        if n != 0:
            raise ValueError("closed-form Ising metric is implemented for the ground state only")
        return velocities[:, 0] ** 2 * model.mode_metrics(lams[:, 0]).sum(axis=1)
    energies, states = eigensystems(model, lams, levels=(n,))
    w = _metric_weights(energies, n)
    dH = model.directional_derivative_many(lams, velocities)
    amp = np.einsum("mal,mab,mb->ml", states.conj(), dH, states[:, :, n])
    return np.einsum("ml,ml->m", w, np.abs(amp) ** 2)


def rate_along(model, path: Path, u, n: int = 0) -> np.ndarray:
    """Overall non-adiabatic rate sqrt(lam'(u) g lam'(u)) along ``path``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    try:
        r2 = _rate_squared_many(model, path(u), path.derivative(u), n)
    except DegenerateSpectrumError as exc:
        raise DegenerateSpectrumError(f"degenerate spectrum on path: {exc}", exc.pair, exc.point) from exc
    return np.sqrt(np.maximum(r2, 0.0))


def overall_rate(model, path: Path, u, n: int = 0):
    """Scalar-friendly wrapper around :func:`rate_along`."""
    out = rate_along(model, path, u, n)
    return float(out[0]) if np.ndim(u) == 0 else out


def length_quadrature(model, path: Path, n: int = 0, tol: float = DEFAULT_TOL, initial: int = 8):
    path.check_clearance()
    return integrate(lambda u: rate_along(model, path, u, n), 0.0, 1.0, rtol=tol, initial=initial)


def adiabatic_length(model, path: Path, n: int = 0, tol: float = DEFAULT_TOL) -> float:
    """Quantum adiabatic length of ``path`` for level ``n``."""
    return float(length_quadrature(model, path, n, tol).value)


def ising_length_density(N: int, J: float, lam, combine: str = "sum"):
    """dL/dlam for the Ising ground state.

    ``combine="sum"`` adds the per-mode rates sin k / (8 J r^3) linearly;
    ``combine="rss"`` takes the root of the summed squares, which is what the
    metric of the product state gives.
    """
    out = _ising_density(IsingChain(N, J), lam, combine)
    return float(out[0]) if np.ndim(lam) == 0 else out


def _ising_density(chain, lam, combine):
    metrics = chain.mode_metrics(lam)
    if combine == "sum":
        return np.sqrt(metrics).sum(axis=1)
    if combine == "rss":
        return np.sqrt(metrics.sum(axis=1))
    raise ValueError(f"combine must be 'sum' or 'rss', got {combine!r}")


def ising_length(N: int, J: float, lam_start: float, lam_end: float, combine: str = "rss", tol=DEFAULT_TOL):
    """Length of the straight lam-interval for the finite chain."""
    if lam_start == lam_end:
        return 0.0
    chain = IsingChain(N, J)
    lo, hi = sorted((lam_start, lam_end))
    crit = [c for c in (-1.0, 1.0) if lo < c < hi]
    res = integrate(lambda x: _ising_density(chain, x, combine), lo, hi, rtol=tol, breakpoints=crit)
    return float(res.value)


def ising_metric_thermo(lam, J: float = 1.0):
    """Per-site ground-state metric of the infinite chain, 1 / (256 J^2 |1 - lam^2|^3)."""
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore"):
        return 1.0 / (256 * J**2 * np.abs(1 - lam**2) ** 3)


def ising_length_thermo(lam_start: float, lam_end: float, J: float = 1.0, N: float = 1.0) -> float:
    """Length per path in the thermodynamic limit (scaled by sqrt(N)).

    Raises :class:`DivergentLengthError` when the interval touches lam = +-1.
    """
    lo, hi = sorted((lam_start, lam_end))
    for c in (-1.0, 1.0):
        if lo <= c <= hi:
            raise DivergentLengthError(f"interval [{lo}, {hi}] reaches the critical point lam={c}")

    # d/dlam of lam / sqrt|1 - lam^2| is |1 - lam^2|^(-3/2)
    def primitive(x):
        return x / np.sqrt(abs(1 - x * x))

    return float(np.sqrt(N) * abs(primitive(hi) - primitive(lo)) / (16 * J))


def sphere_metric(lam) -> MetricTensor:
    """Closed-form ground-state metric of the general two-level system."""
    lam = np.asarray(lam, dtype=float)
    r2 = float(lam @ lam)
    if r2 == 0:
        raise DegenerateSpectrumError("two-level metric is undefined at lam = 0", point=lam)
    matrix = (r2 * np.eye(3) - np.outer(lam, lam)) / (4 * r2**3)
    return MetricTensor(lam, matrix)


def mode_rates(chain: IsingChain, lam) -> np.ndarray:
    """Per-mode |T_k| / |lam'| = sin k / (8 J r^3), shape (M, modes)."""
    return np.sqrt(chain.mode_metrics(lam))


__all__ = [
    "DivergentLengthError",
    "IsingMode",
    "MetricTensor",
    "Path",
    "PathClearanceError",
    "QuadratureError",
    "adiabatic_length",
    "dqgt",
    "dqgt_many",
    "ising_length",
    "ising_length_density",
    "ising_length_thermo",
    "ising_metric_thermo",
    "length_quadrature",
    "mode_rates",
    "overall_rate",
    "rate_along",
    "sphere_metric",
]
