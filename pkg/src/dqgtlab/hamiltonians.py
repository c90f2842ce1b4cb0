"""Parametrized model Hamiltonians and a gauge-fixed eigensolver.

Every model maps a real control vector ``lam`` to a Hermitian matrix and
supplies the analytic derivative with respect to each control parameter.
Batched variants (``evaluate_many`` / ``derivative_many``) accept an array of
control vectors with shape ``(M, param_count)`` and return ``(M, d, d)``.

Units: hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

DEGENERACY_TOL = 1e-10


class InvalidModelError(ValueError):
    """Model parameters outside their physical domain."""


class DegenerateSpectrumError(ValueError):
    """Two adjacent energies closer than the degeneracy tolerance."""

    def __init__(self, message, pair=None, point=None):
        super().__init__(message)
        self.pair = pair
        self.point = point


def _as_points(lam, param_count):
    """Coerce control input to shape (M, param_count)."""
    arr = np.asarray(lam, dtype=float)
    if param_count == 1 and arr.ndim <= 1:
        return arr.reshape(-1, 1)
    return np.atleast_2d(arr).reshape(-1, param_count)


class ParamHamiltonian:
    """Base class for a Hamiltonian H(lam) with analytic parameter derivatives.

    Subclasses implement :meth:`evaluate_many` and :meth:`derivative_many`;
    the single-point methods are thin wrappers around them.
    """

    dimension: int
    param_count: int

    def evaluate_many(self, lams: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative_many(self, lams: np.ndarray, i: int) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, lam) -> np.ndarray:
        return self.evaluate_many(_as_points(lam, self.param_count))[0]

    def derivative(self, lam, i: int) -> np.ndarray:
        return self.derivative_many(_as_points(lam, self.param_count), i)[0]

    def directional_derivative_many(self, lams, velocities) -> np.ndarray:
        """Sum_i v_i dH/dlam_i for each row of ``lams`` and ``velocities``."""
        lams = _as_points(lams, self.param_count)
        velocities = _as_points(velocities, self.param_count)
        out = np.zeros((len(lams), self.dimension, self.dimension), dtype=complex)
        for i in range(self.param_count):
            out += velocities[:, i, None, None] * self.derivative_many(lams, i)
        return out


class LandauZener(ParamHamiltonian):
    """H = (delta/2)(sigma_x + lam sigma_z)."""

    dimension = 2
    param_count = 1

    def __init__(self, delta: float):
        if not delta > 0:
            raise InvalidModelError(f"Landau-Zener gap delta must be positive, got {delta}")
        self.delta = float(delta)

    def evaluate_many(self, lams):
        lam = _as_points(lams, 1)[:, 0]
        return 0.5 * self.delta * (SIGMA_X[None] + lam[:, None, None] * SIGMA_Z[None])

    def derivative_many(self, lams, i):
        if i != 0:
            raise IndexError(i)
        lam = _as_points(lams, 1)[:, 0]
        return np.broadcast_to(0.5 * self.delta * SIGMA_Z, (len(lam), 2, 2)).copy()

    def __repr__(self):
        return f"LandauZener(delta={self.delta})"


class TwoLevel(ParamHamiltonian):
    """General two-level system H = (1/2) lam . sigma with lam = (x, y, z)."""

    dimension = 2
    param_count = 3
    _paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)

    def evaluate_many(self, lams):
        lams = _as_points(lams, 3)
        return 0.5 * np.einsum("mi,ijk->mjk", lams.astype(complex), np.stack(self._paulis))

    def derivative_many(self, lams, i):
        lams = _as_points(lams, 3)
        return np.broadcast_to(0.5 * self._paulis[i], (len(lams), 2, 2)).copy()

    def __repr__(self):
        return "TwoLevel()"


@dataclass(frozen=True)
class IsingMode(ParamHamiltonian):
    """One (k, -k) pair block of the Jordan-Wigner transverse-field Ising chain.

    The block acts on ``[|1_k 1_-k>, |0_k 0_-k>]`` (in that order), where it
    reads ``2J [[lam - cos k, -i sin k], [i sin k, -lam + cos k]]``. With this
    ordering the ground state is ``u|00> + i v|11>`` with the Bogoliubov
    coefficients returned by :func:`ising_ground_coefficients`.
    """

    k: float
    J: float = 1.0
    N: int | None = None

    dimension = 2
    param_count = 1

    def __post_init__(self):
        if not 0.0 < self.k < np.pi:
            raise InvalidModelError(f"mode wavenumber k={self.k} outside (0, pi)")
        if self.N is not None:
            if self.N < 4 or self.N % 2:
                raise InvalidModelError(f"site count N={self.N} must be even and >= 4")
            m = self.k * self.N / (2 * np.pi)
            if abs(m - round(m)) > 1e-9:
                raise InvalidModelError(f"k={self.k} is not on the 2*pi/{self.N} grid")

    @classmethod
    def grid(cls, N: int, J: float = 1.0) -> list[IsingMode]:
        """All retained modes k = 2 pi m / N, m = 1 .. N/2 - 1."""
        if N < 4 or N % 2:
            raise InvalidModelError(f"site count N={N} must be even and >= 4")
        return [cls(2 * np.pi * m / N, J, N) for m in range(1, N // 2)]

    def quasiparticle_energy(self, lam):
        lam = np.asarray(lam, dtype=float)
        return 2 * self.J * np.sqrt(lam**2 - 2 * lam * np.cos(self.k) + 1)

    def evaluate_many(self, lams):
        lam = _as_points(lams, 1)[:, 0]
        a = lam - np.cos(self.k)
        b = np.sin(self.k)
        out = np.empty((len(lam), 2, 2), dtype=complex)
        out[:, 0, 0] = a
        out[:, 1, 1] = -a
        out[:, 0, 1] = -1j * b
        out[:, 1, 0] = 1j * b
        return 2 * self.J * out

    def derivative_many(self, lams, i):
        if i != 0:
            raise IndexError(i)
        lam = _as_points(lams, 1)[:, 0]
        return np.broadcast_to(2 * self.J * SIGMA_Z, (len(lam), 2, 2)).copy()


class IsingChain(ParamHamiltonian):
    """Transverse-field Ising ring restricted to the paired k-blocks.

    The explicit product-space matrix (``2**(N/2 - 1)`` states) is only built
    for small chains; geometry code uses the per-mode closed form for the
    ground-state metric at any N.
    """

    param_count = 1
    max_explicit_modes = 10

    def __init__(self, N: int, J: float = 1.0):
        self.N = int(N)
        self.J = float(J)
        self.modes = IsingMode.grid(self.N, self.J)
        self.dimension = 2 ** len(self.modes)

    def _embed(self, blocks):
        # blocks: list over modes of (M, 2, 2); sum_k I x .. x B_k x .. x I
        if len(self.modes) > self.max_explicit_modes:
            raise InvalidModelError(
                f"explicit product space for N={self.N} has {self.dimension} states; "
                "use the per-mode routines instead"
            )
        M = blocks[0].shape[0]
        out = np.zeros((M, self.dimension, self.dimension), dtype=complex)
        for j, block in enumerate(blocks):
            for m in range(M):
                factors = [IDENTITY_2] * len(blocks)
                factors[j] = block[m]
                out[m] += reduce(np.kron, factors)
        return out

    def evaluate_many(self, lams):
        return self._embed([mode.evaluate_many(lams) for mode in self.modes])

    def derivative_many(self, lams, i):
        return self._embed([mode.derivative_many(lams, i) for mode in self.modes])

    def mode_metrics(self, lam) -> np.ndarray:
        """Per-mode ground-state metric sin^2 k / (64 J^2 r^6), shape (M, modes)."""
        lam = np.asarray(lam, dtype=float).reshape(-1, 1)
        k = np.array([mode.k for mode in self.modes])[None, :]
        r2 = lam**2 - 2 * lam * np.cos(k) + 1
        return np.sin(k) ** 2 / (64 * self.J**2 * r2**3)

    def __repr__(self):
        return f"IsingChain(N={self.N}, J={self.J})"


def lz_hamiltonian(delta: float, lam: float) -> np.ndarray:
    """Landau-Zener matrix (delta/2)(sigma_x + lam sigma_z)."""
    return LandauZener(delta).evaluate(lam)


def two_level_hamiltonian(lam) -> np.ndarray:
    """(1/2)(lx sigma_x + ly sigma_y + lz sigma_z); raises at the degenerate origin."""
    lam = np.asarray(lam, dtype=float)
    if np.linalg.norm(lam) == 0:
        raise DegenerateSpectrumError("two-level Hamiltonian is degenerate at lam = 0", point=lam)
    return TwoLevel().evaluate(lam)


def ising_mode_hamiltonian(mode: IsingMode, lam: float) -> np.ndarray:
    return mode.evaluate(lam)


def ising_ground_coefficients(mode: IsingMode, lam: float) -> tuple[float, float]:
    """Bogoliubov pair (u_k, v_k) = (cos(theta/2), sin(theta/2)).

    theta is the two-argument angle of (lam - cos k, sin k), so it lies in
    (0, pi), tends to 0 as lam -> +inf and is continuous through lam = cos k.
    """
    theta = np.arctan2(np.sin(mode.k), lam - np.cos(mode.k))
    return float(np.cos(theta / 2)), float(np.sin(theta / 2))


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray
    states: np.ndarray
    gap_min: float


def fix_gauge(states: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real positive.

    Works on (d, d) or stacked (M, d, d) arrays. ``argmax`` returns the first
    maximum, which breaks ties by lowest index.
    """
    states = np.asarray(states, dtype=complex)
    idx = np.argmax(np.abs(states), axis=-2)
    pivot = np.take_along_axis(states, idx[..., None, :], axis=-2)
    out = states * (np.conj(pivot) / np.abs(pivot))
    # write the pivot back exactly so its imaginary part is a true zero
    np.put_along_axis(out, idx[..., None, :], np.abs(pivot), axis=-2)
    return out


def eigensystems(model: ParamHamiltonian, lams, degeneracy_tol: float = DEGENERACY_TOL, levels=None):
    """Batched gauge-fixed diagonalisation; returns (energies (M,d), states (M,d,d)).

    ``levels`` restricts the degeneracy check to gaps adjacent to the given
    level indices; by default every neighbouring pair must be split.
    """
    pts = _as_points(lams, model.param_count)
    energies, states = np.linalg.eigh(model.evaluate_many(pts))
    gaps = np.diff(energies, axis=-1)
    if levels is not None and gaps.size:
        keep = sorted({j for n in levels for j in (n - 1, n) if 0 <= j < gaps.shape[1]})
        gaps = np.where(np.isin(np.arange(gaps.shape[1]), keep), gaps, np.inf)
    if gaps.size and gaps.min() <= degeneracy_tol:
        m, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise DegenerateSpectrumError(
            f"levels {j} and {j + 1} are degenerate (gap {gaps[m, j]:.3e}) at lam={pts[m]}",
            pair=(int(j), int(j + 1)),
            point=pts[m],
        )
    return energies, fix_gauge(states)


def eigensystem(model: ParamHamiltonian, lam, degeneracy_tol: float = DEGENERACY_TOL, levels=None) -> EigenSystem:
    energies, states = eigensystems(model, lam, degeneracy_tol, levels)
    gaps = np.diff(energies[0])
    return EigenSystem(energies[0], states[0], float(gaps.min()) if gaps.size else np.inf)
