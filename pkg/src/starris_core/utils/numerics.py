#!/usr/bin/env python3
"""
Dense complex linear algebra and scalar root finding.
Every convex block update in the solver stack goes through these two
contracts: a Cholesky-based Hermitian positive-definite solve and a
bisection on a monotone decreasing scalar function.
"""

import logging
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from ..errors import InvalidBracketError, InvalidInputError, NumericalError

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12


def _require_finite(name: str, value: np.ndarray) -> None:
    if not np.all(np.isfinite(value)):
        raise InvalidInputError(f"{name} contains NaN or Inf entries")


def solve_hpd(
    A: np.ndarray, b: np.ndarray, block: Optional[str] = None
) -> np.ndarray:
    """Solve A x = b for Hermitian positive-definite A.

    b may be a vector or a matrix of right-hand sides. Indefinite A is
    reported as a NumericalError tagged with the calling block name.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)

    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise InvalidInputError(
            f"right-hand side length {b.shape[0]} does not match matrix size {A.shape[0]}"
        )
    _require_finite("matrix", A)
    _require_finite("right-hand side", b)

    scale = max(np.linalg.norm(A), 1.0)
    if np.linalg.norm(A - A.conj().T) > HERMITIAN_RTOL * scale:
        raise InvalidInputError("matrix is not Hermitian")
    A = 0.5 * (A + A.conj().T)

    try:
        factor = scipy.linalg.cho_factor(A, lower=False, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"matrix is not positive definite: {e}", block=block)

    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def bisect_decreasing(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> float:
    """Root of a continuous nonincreasing f on [lo, hi].

    Requires f(lo) >= 0 >= f(hi). Returns the right endpoint of the final
    bracket, so that f(result) <= 0 unless an exact |f| <= tol hit occurs.
    """
    if not hi >= lo:
        raise InvalidBracketError(f"empty bracket [{lo}, {hi}]")

    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo < 0 or f_hi > 0:
        raise InvalidBracketError(
            f"f({lo})={f_lo:.3e} and f({hi})={f_hi:.3e} do not bracket a root"
        )
    if abs(f_lo) <= tol:
        return lo
    if abs(f_hi) <= tol:
        return hi

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= tol:
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(hi)):
            break

    return hi
