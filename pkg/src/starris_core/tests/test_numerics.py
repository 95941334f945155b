"""
Tests for the Hermitian positive-definite solve and monotone bisection
"""

import numpy as np
import pytest

from starris_core.errors import InvalidBracketError, InvalidInputError, NumericalError
from starris_core.utils.numerics import bisect_decreasing, solve_hpd

from .conftest import circular_gaussian


def random_hpd(rng, n):
    X = circular_gaussian(rng, (n, n))
    return X @ X.conj().T + np.eye(n)


class TestSolveHpd:
    def test_vector_rhs(self, rng):
        A = random_hpd(rng, 6)
        b = circular_gaussian(rng, 6)
        x = solve_hpd(A, b)
        assert np.allclose(A @ x, b, atol=1e-10)

    def test_matrix_rhs(self, rng):
        A = random_hpd(rng, 5)
        B = circular_gaussian(rng, (5, 3))
        X = solve_hpd(A, B)
        assert X.shape == (5, 3)
        assert np.allclose(A @ X, B, atol=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 8, 16, 32, 64])
    def test_relative_residual(self, rng, n):
        A = random_hpd(rng, n)
        b = circular_gaussian(rng, n)
        x = solve_hpd(A, b)
        assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_identity(self):
        b = np.array([1.0 + 2.0j, -3.0j])
        assert np.allclose(solve_hpd(np.eye(2), b), b)

    def test_indefinite_reports_block(self):
        A = np.diag([1.0, -1.0])
        with pytest.raises(NumericalError) as excinfo:
            solve_hpd(A, np.ones(2), block="beamformer")
        assert excinfo.value.block == "beamformer"
        assert str(excinfo.value).startswith("[beamformer]")

    def test_non_hermitian_rejected(self):
        A = np.array([[2.0, 1.0j], [1.0j, 2.0]])
        with pytest.raises(InvalidInputError):
            solve_hpd(A, np.ones(2))

    def test_non_finite_rejected(self):
        A = np.eye(2)
        with pytest.raises(InvalidInputError):
            solve_hpd(A, np.array([np.nan, 1.0]))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            solve_hpd(np.eye(3), np.ones(2))


class TestBisectDecreasing:
    def test_linear_root(self):
        root = bisect_decreasing(lambda x: 1.0 - x, 0.0, 4.0)
        assert abs(root - 1.0) < 1e-9

    def test_power_function_root(self):
        root = bisect_decreasing(lambda mu: 1.0 / (1.0 + mu) ** 2 - 0.25, 0.0, 8.0)
        assert abs(root - 1.0) < 1e-8

    def test_root_does_not_depend_on_upper_end(self):
        def f(mu):
            return 1.0 / (1.0 + mu) ** 2 - 0.25

        roots = [bisect_decreasing(f, 0.0, hi) for hi in (1.5, 8.0, 1e3)]
        assert max(roots) - min(roots) < 1e-8
        assert all(f(root) <= 1e-10 for root in roots)

    def test_root_at_left_end(self):
        assert bisect_decreasing(lambda x: -x, 0.0, 1.0) == 0.0

    def test_bad_bracket(self):
        with pytest.raises(InvalidBracketError):
            bisect_decreasing(lambda x: x - 1.0, 0.0, 4.0)

    def test_bad_bracket_is_invalid_input(self):
        with pytest.raises(InvalidInputError):
            bisect_decreasing(lambda x: 1.0 - x, 2.0, 4.0)
