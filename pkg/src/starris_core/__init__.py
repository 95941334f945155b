"""
STAR-RIS Core - Coupled Phase-Shift Optimization

Throughput maximization for STAR-RIS aided multi-user downlinks under
energy conservation and coupled transmission/reflection phase shifts,
solved by penalty dual decomposition with WMMSE blocks, plus the
benchmark schemes and experiment harness.
"""

__version__ = "2.0.0"
__author__ = "STAR-RIS Core Team"

from .config import ExperimentConfig, PddConfig, SystemConfig, load_config
from .errors import (
    ConfigError,
    FeasibilityError,
    InternalError,
    InvalidBracketError,
    InvalidInputError,
    NumericalError,
    StarRisError,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "FeasibilityError",
    "InternalError",
    "InvalidBracketError",
    "InvalidInputError",
    "NumericalError",
    "PddConfig",
    "StarRisError",
    "SystemConfig",
    "load_config",
]
