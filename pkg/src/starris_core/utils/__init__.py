"""
Numerical utilities
"""

from .numerics import bisect_decreasing, solve_hpd

__all__ = ["bisect_decreasing", "solve_hpd"]
