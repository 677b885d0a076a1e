"""Inhibitory interacting-neuron network simulator.

Finite-network event simulation by thinning, spectral stability diagnosis
via the reproduction matrix, and perfect simulation of the stationary
state on the integer lattice.
"""

__version__ = "0.1.0"

from .errors import (
    CapExceededError,
    ConfigError,
    ConvergenceError,
    DomainError,
    InhibnetError,
    SpectralError,
)

__all__ = [
    "__version__",
    "InhibnetError",
    "ConfigError",
    "DomainError",
    "SpectralError",
    "ConvergenceError",
    "CapExceededError",
]
