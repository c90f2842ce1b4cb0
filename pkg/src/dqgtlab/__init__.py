"""Adiabatic-length geometry and optimal control of driven quantum systems."""

__version__ = "0.1.0"

from .dynamics import first_order, ising_ground_transition, propagate, transition_probability  # noqa: E402
from .geometry import Path, adiabatic_length, dqgt, ising_length, sphere_metric  # noqa: E402
from .hamiltonians import IsingChain, IsingMode, LandauZener, TwoLevel, eigensystem  # noqa: E402
from .protocols import (  # noqa: E402
    Protocol,
    constant_rate_reparametrize,
    ising_optimal_protocol_finite,
    linear_protocol,
    lz_optimal,
)

__all__ = [
    "IsingChain", "IsingMode", "LandauZener", "Path", "Protocol", "TwoLevel", "__version__",
    "adiabatic_length", "constant_rate_reparametrize", "dqgt", "eigensystem", "first_order",
    "ising_ground_transition", "ising_length", "ising_optimal_protocol_finite", "linear_protocol",
    "lz_optimal", "propagate", "sphere_metric", "transition_probability",
]
