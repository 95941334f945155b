"""
Comparison schemes
"""

from .schemes import (
    SchemeId,
    SchemeResult,
    run_scheme,
    solve_ao,
    solve_conventional,
    solve_coupled,
    solve_independent,
    solve_pspsc,
)

__all__ = [
    "SchemeId",
    "SchemeResult",
    "run_scheme",
    "solve_ao",
    "solve_conventional",
    "solve_coupled",
    "solve_independent",
    "solve_pspsc",
]
