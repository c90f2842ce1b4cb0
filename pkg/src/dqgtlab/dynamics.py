"""Schrodinger propagation under a protocol and first-order adiabatic estimates.

The state is integrated in the fixed computational basis in rescaled time
s = t / tau, i.e. d psi / ds = -i tau H(lam(s)) psi, and then projected onto
the gauge-fixed instantaneous eigenbasis at the sample times.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .hamiltonians import IsingMode, ParamHamiltonian, eigensystems
from .protocols import Protocol
from .quadrature import integrate

log = logging.getLogger(__name__)

DEFAULT_ATOL = 1e-10
DEFAULT_RTOL = 1e-10


class IntegrationError(RuntimeError):
    """The adaptive integrator could not advance."""

    def __init__(self, message, time=None, modes=None):
        super().__init__(message)
        self.time = time
        self.modes = modes


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)


@dataclass(frozen=True)
class Trajectory:
    """Amplitudes c_{nl}(t) = <l(t)|psi_n(t)> at the sample times."""

    times: np.ndarray
    s: np.ndarray
    lam: np.ndarray
    amplitudes: np.ndarray
    states: np.ndarray
    level: int
    tau: float
    norm_drift: float

    @property
    def probabilities(self):
        return transition_probability(self)


@dataclass(frozen=True)
class PhaseAccumulator:
    """Dynamical and Berry phases of every level at the requested s values."""

    s: np.ndarray
    dynamical: np.ndarray
    berry: np.ndarray

    @property
    def total(self):
        return self.dynamical + self.berry


@dataclass(frozen=True)
class FirstOrder:
    times: np.ndarray
    probability: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rates: np.ndarray = field(repr=False)
    phases: PhaseAccumulator = field(repr=False)


def sample_times(tau: float, samples: int) -> np.ndarray:
    return np.linspace(0.0, tau, samples)


def propagate(
    model: ParamHamiltonian,
    protocol: Protocol,
    tau: float,
    n: int = 0,
    abs_tol: float = DEFAULT_ATOL,
    rel_tol: float = DEFAULT_RTOL,
    times=None,
    samples: int = 201,
) -> Trajectory:
    """Integrate the Schrodinger equation from the n-th eigenstate of H(lam(0))."""
    if not tau > 0:
        raise ValueError(f"operation time must be positive, got {tau}")
    times = sample_times(tau, samples) if times is None else np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0) or times[0] < 0 or times[-1] > tau * (1 + 1e-12):
        raise ValueError("sample times must be increasing within [0, tau]")
    s_eval = np.clip(times / tau, 0.0, 1.0)

    _, v0 = eigensystems(model, protocol(0.0), levels=(n,))
    psi0 = v0[0][:, n].copy()

    def rhs(s, psi):
        return -1j * tau * (model.evaluate(protocol(s)) @ psi)

    sol = solve_ivp(rhs, (0.0, 1.0), psi0, method="DOP853", t_eval=s_eval, rtol=rel_tol, atol=abs_tol)
    if sol.status != 0:
        t_fail = tau * (sol.t[-1] if sol.t.size else 0.0)
        raise IntegrationError(f"integration failed at t={t_fail:.6g}: {sol.message}", time=t_fail)

    return _trajectory(model, protocol, tau, n, times, s_eval, sol.y.T)


def _trajectory(model, protocol, tau, n, times, s_eval, psi) -> Trajectory:
    """Project computational-basis states onto the instantaneous eigenbasis."""
    times, s_eval = np.array(times, dtype=float), np.array(s_eval, dtype=float)
    lam = protocol(s_eval)
    _, vecs = eigensystems(model, lam, levels=(n,))
    amps = np.einsum("mal,ma->ml", vecs.conj(), psi)
    if s_eval[0] == 0.0:
        amps[0] = 0.0
        amps[0, n] = 1.0
    drift = float(np.max(np.abs(1.0 - np.sum(np.abs(amps) ** 2, axis=1))))
    if drift > 1e-8:
        log.warning("norm drift %.3e exceeds 1e-8 (tau=%g)", drift, tau)
    _frozen(times, s_eval, lam, amps, psi)
    return Trajectory(times, s_eval, lam, amps, psi, n, float(tau), drift)


def transition_probability(trajectory: Trajectory, n: int | None = None) -> np.ndarray:
    """P_n(t) = sum_{l != n} |c_nl(t)|^2, clipped into [0, 1]."""
    n = trajectory.level if n is None else n
    weights = np.abs(trajectory.amplitudes) ** 2
    p = weights.sum(axis=1) - weights[:, n]
    return np.clip(p, 0.0, 1.0)


def project(trajectory: Trajectory, basis: np.ndarray) -> np.ndarray:
    """Amplitudes of the stored states in an arbitrary (M, d, d) column basis."""
    return np.einsum("mal,ma->ml", basis.conj(), trajectory.states)


def _energies(model, protocol):
    def f(s):
        return eigensystems(model, protocol(s))[0]

    return f


def accumulate_phases(model, protocol: Protocol, tau: float, s, fine: int = 2001,
                      overlap_tol: float = 1e-6, max_rounds: int = 30) -> PhaseAccumulator:
    """Phases of all levels at the (increasing) rescaled times ``s``.

    Dynamical phase: tau * integral of E_l by adaptive quadrature. Berry
    phase: accumulated argument of overlaps <l(s_i)|l(s_i+1)> of the
    fixed-gauge eigenvectors on a grid refined until every overlap has
    modulus above ``1 - overlap_tol``. Jumps of the fixed gauge enter as
    discrete phase steps, so only exp(i * phase) is meaningful.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    edges = np.unique(np.concatenate([[0.0, 1.0], s]))
    res = integrate(_energies(model, protocol), 0.0, 1.0, rtol=1e-12, atol=1e-300, breakpoints=edges)
    cum = res.cumulative()
    dyn = tau * cum[np.searchsorted(res.breakpoints, s)]

    grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, fine), s]))
    vecs = eigensystems(model, protocol(grid))[1]
    for _ in range(max_rounds):
        ov = np.einsum("mal,mal->ml", vecs[:-1].conj(), vecs[1:])
        bad = np.abs(ov).min(axis=1) < 1 - overlap_tol
        if not bad.any():
            break
        mids = 0.5 * (grid[:-1][bad] + grid[1:][bad])
        grid = np.concatenate([grid, mids])
        order = np.argsort(grid, kind="stable")
        grid = grid[order]
        vecs = np.concatenate([vecs, eigensystems(model, protocol(mids))[1]])[order]
    ov = np.einsum("mal,mal->ml", vecs[:-1].conj(), vecs[1:])
    steps = np.angle(ov)
    berry_grid = np.concatenate([np.zeros((1, steps.shape[1])), np.cumsum(steps, axis=0)])
    berry = berry_grid[np.searchsorted(grid, s)]
    return PhaseAccumulator(s, dyn, berry)


def transition_rates(model, protocol: Protocol, n: int, s) -> np.ndarray:
    """T_nl(s) = <l|d_s n> / (E_n - E_l) in the fixed gauge, shape (M, d)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    lam = protocol(s)
    energies, vecs = eigensystems(model, lam, levels=(n,))
    dH = model.directional_derivative_many(lam, protocol.velocity(s))
    num = np.einsum("mal,mab,mb->ml", vecs.conj(), dH, vecs[:, :, n])
    gap = energies[:, n, None] - energies
    gap[:, n] = 1.0
    rates = num / gap**2
    rates[:, n] = 0.0
    return rates


def first_order(model, protocol: Protocol, tau: float, n: int, t) -> FirstOrder:
    """First-order transition probability and its bounds at times ``t``.

    P_n(t) = tau^-2 sum_{l!=n} |T_nl(s) exp(-i[Phi_n - Phi_l]) - T_nl(0)|^2,
    which vanishes at t = 0 as it must.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.clip(t / tau, 0.0, 1.0)
    order = np.argsort(s, kind="stable")
    s_sorted = s[order]
    uniq, inverse = np.unique(s_sorted, return_inverse=True)
    phases = accumulate_phases(model, protocol, tau, uniq)
    rates_u = transition_rates(model, protocol, n, uniq)
    rate0 = transition_rates(model, protocol, n, 0.0)[0]
    phi = phases.total
    rel = phi[:, n, None] - phi
    osc = rates_u * np.exp(-1j * rel)
    p_u = np.sum(np.abs(osc - rate0[None, :]) ** 2, axis=1) / tau**2
    mag, mag0 = np.abs(rates_u), np.abs(rate0)[None, :]
    lo_u = np.sum((mag - mag0) ** 2, axis=1) / tau**2
    hi_u = np.sum((mag + mag0) ** 2, axis=1) / tau**2

    def back(x):
        out = np.empty_like(x[inverse])
        out[order] = x[inverse]
        return out

    return FirstOrder(t, back(p_u), back(lo_u), back(hi_u), back(rates_u), phases)


def first_order_probability(model, protocol, tau, n, t):
    out = first_order(model, protocol, tau, n, t).probability
    return float(out[0]) if np.ndim(t) == 0 else out


def probability_bounds(model, protocol, tau, n, t):
    fo = first_order(model, protocol, tau, n, t)
    if np.ndim(t) == 0:
        return float(fo.lower[0]), float(fo.upper[0])
    return fo.lower, fo.upper


@dataclass(frozen=True)
class IsingTransition:
    times: np.ndarray
    probability: np.ndarray
    modes: list
    mode_probabilities: np.ndarray
    trajectories: list = field(repr=False)

    @property
    def norm_drift(self):
        return max(tr.norm_drift for tr in self.trajectories)


def _propagate_modes(modes, protocol, tau, abs_tol, rel_tol, times, samples) -> list[Trajectory]:
    """Integrate all k-blocks as one stacked system sharing the step size.

    The integrator controls an RMS error over all components, so the
    tolerances are divided by sqrt(component count) to keep the per-mode
    error at the requested level.
    """
    if not tau > 0:
        raise ValueError(f"operation time must be positive, got {tau}")
    times = sample_times(tau, samples) if times is None else np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0) or times[0] < 0 or times[-1] > tau * (1 + 1e-12):
        raise ValueError("sample times must be increasing within [0, tau]")
    s_eval = np.clip(times / tau, 0.0, 1.0)
    J = modes[0].J
    k = np.array([m.k for m in modes])
    cos_k, sin_k = np.cos(k), np.sin(k)
    lam0 = protocol(0.0)
    psi0 = np.stack([eigensystems(m, lam0)[1][0][:, 0] for m in modes])

    def rhs(s, y):
        lam = protocol(s)[0]
        psi = y.reshape(-1, 2)
        a = 2 * J * (lam - cos_k)
        b = 2 * J * sin_k
        out = np.empty_like(psi)
        out[:, 0] = a * psi[:, 0] - 1j * b * psi[:, 1]
        out[:, 1] = 1j * b * psi[:, 0] - a * psi[:, 1]
        return (-1j * tau) * out.ravel()

    scale = np.sqrt(psi0.size)
    sol = solve_ivp(rhs, (0.0, 1.0), psi0.ravel(), method="DOP853", t_eval=s_eval,
                    rtol=rel_tol / scale, atol=abs_tol / scale)
    if sol.status != 0:
        t_fail = tau * (sol.t[-1] if sol.t.size else 0.0)
        raise IntegrationError(f"integration failed at t={t_fail:.6g}: {sol.message}", time=t_fail)
    states = sol.y.T.reshape(len(s_eval), len(modes), 2)
    return [_trajectory(m, protocol, tau, 0, times, s_eval, states[:, j].copy())
            for j, m in enumerate(modes)]


def ising_ground_transition(N: int, J: float, protocol: Protocol, tau: float,
                            abs_tol: float = DEFAULT_ATOL, rel_tol: float = DEFAULT_RTOL,
                            times=None, samples: int = 201) -> IsingTransition:
    """Ground-state transition probability of the chain, 1 - prod_k (1 - p_k(t))."""
    modes = IsingMode.grid(N, J)
    try:
        trajectories = _propagate_modes(modes, protocol, tau, abs_tol, rel_tol, times, samples)
    except IntegrationError:
        # redo mode by mode to report which wavenumbers fail
        failures = []
        for mode in modes:
            try:
                propagate(mode, protocol, tau, 0, abs_tol, rel_tol, times, samples)
            except IntegrationError as exc:
                failures.append((mode.k, exc))
        if not failures:
            raise
        ks = ", ".join(f"k={k:.6g}" for k, _ in failures)
        raise IntegrationError(f"integration failed for modes {ks}: {failures[0][1]}",
                               modes=[k for k, _ in failures]) from None
    probs = np.stack([transition_probability(tr) for tr in trajectories], axis=1)
    survival = np.prod(1.0 - probs, axis=1)
    return IsingTransition(trajectories[0].times, 1.0 - survival, modes, probs, trajectories)


def ising_first_order(N: int, J: float, protocol: Protocol, tau: float, t) -> FirstOrder:
    """Mode-summed first-order estimate and bounds for the chain ground state."""
    parts = [first_order(mode, protocol, tau, 0, t) for mode in IsingMode.grid(N, J)]
    t = parts[0].times
    return FirstOrder(
        t,
        sum(p.probability for p in parts),
        sum(p.lower for p in parts),
        sum(p.upper for p in parts),
        np.stack([p.rates[:, 1] for p in parts], axis=1),
        parts[0].phases,
    )
