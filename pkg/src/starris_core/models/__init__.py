"""
Core models module for STAR-RIS coefficients
"""

from .star_model import (
    ConstraintResiduals,
    StarCoefficients,
    constraint_residuals,
    phase_differences,
    to_complex,
)

__all__ = [
    "ConstraintResiduals",
    "StarCoefficients",
    "constraint_residuals",
    "phase_differences",
    "to_complex",
]
