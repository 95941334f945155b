"""
Output validators
"""

from .feasibility import FeasibilityReport, validate_scheme_output

__all__ = ["FeasibilityReport", "validate_scheme_output"]
