"""
Tests for the STAR-RIS coefficient model and its constraints
"""

import numpy as np
import pytest

from starris_core.errors import InvalidInputError
from starris_core.models.star_model import (
    TWO_PI,
    StarCoefficients,
    canonical_phase,
    constraint_residuals,
    phase_differences,
    random_coupled,
    to_complex,
)


class TestStarCoefficients:
    def test_polar_complex_consistency(self, rng):
        coeffs = random_coupled(12, rng)
        theta_t, theta_r = to_complex(coeffs)
        back = StarCoefficients.from_complex(theta_t, theta_r)
        assert np.allclose(back.beta_t, coeffs.beta_t)
        assert np.allclose(back.beta_r, coeffs.beta_r)
        assert np.allclose(np.exp(1j * back.phi_t), np.exp(1j * coeffs.phi_t))
        assert np.allclose(np.exp(1j * back.phi_r), np.exp(1j * coeffs.phi_r))

    def test_phases_canonical(self):
        coeffs = StarCoefficients([1.0, 0.0], [0.0, 1.0], [-np.pi / 2, 5 * np.pi], [7.0, -0.1])
        for phi in (coeffs.phi_t, coeffs.phi_r):
            assert np.all(phi >= 0.0)
            assert np.all(phi < TWO_PI)

    def test_arrays_read_only(self, rng):
        coeffs = random_coupled(4, rng)
        with pytest.raises(ValueError):
            coeffs.beta_t[0] = 0.5

    def test_amplitude_out_of_range(self):
        with pytest.raises(InvalidInputError):
            StarCoefficients([1.2], [0.0], [0.0], [0.0])

    def test_non_finite(self):
        with pytest.raises(InvalidInputError):
            StarCoefficients([np.nan], [0.0], [0.0], [0.0])

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            StarCoefficients([1.0, 0.0], [0.0], [0.0], [0.0])

    def test_from_signed_flips_phase(self):
        coeffs = StarCoefficients.from_signed([-0.6], [0.3], [0.8], [0.2])
        assert np.isclose(coeffs.beta_t[0], 0.6)
        assert np.isclose(coeffs.phi_t[0], 0.3 + np.pi)
        assert np.isclose(coeffs.beta_r[0], 0.8)


class TestConstraints:
    def test_random_coupled_is_feasible(self, rng):
        residuals = constraint_residuals(random_coupled(20, rng))
        assert residuals.max_energy < 1e-12
        assert residuals.max_phase < 1e-12
        assert residuals.is_feasible()

    def test_coupled_phase_gaps(self, rng):
        gaps = phase_differences(random_coupled(20, rng))
        assert np.all(np.abs(np.cos(gaps)) < 1e-12)

    def test_energy_violation_detected(self):
        residuals = constraint_residuals(StarCoefficients([1.0], [1.0], [0.0], [np.pi / 2]))
        assert np.isclose(residuals.max_energy, 1.0)
        assert not residuals.is_feasible()

    def test_phase_violation_detected(self):
        coeffs = StarCoefficients([np.sqrt(0.5)], [np.sqrt(0.5)], [0.0], [0.0])
        residuals = constraint_residuals(coeffs)
        assert residuals.is_energy_feasible()
        assert np.isclose(residuals.max_phase, 1.0)

    def test_three_half_pi_gap_is_coupled(self):
        coeffs = StarCoefficients([0.6], [0.8], [1.5 * np.pi], [0.0])
        residuals = constraint_residuals(coeffs)
        assert residuals.max_phase < 1e-15
        assert residuals.is_feasible()

    def test_negative_amplitude_matches_shifted_phase(self, rng):
        beta_t = rng.uniform(0.0, 1.0, 10)
        beta_r = np.sqrt(1.0 - beta_t ** 2)
        phi_t = rng.uniform(0.0, TWO_PI, 10)
        phi_r = phi_t + 0.5 * np.pi
        flipped = constraint_residuals(StarCoefficients.from_signed(-beta_t, phi_t, beta_r, phi_r))
        shifted = constraint_residuals(StarCoefficients(beta_t, beta_r, phi_t + np.pi, phi_r))
        assert np.allclose(flipped.energy, shifted.energy, atol=1e-15)
        assert np.allclose(flipped.phase, shifted.phase, atol=1e-12)

    def test_repr_shows_both_residuals(self):
        text = repr(constraint_residuals(StarCoefficients([1.0], [0.0], [0.0], [0.5 * np.pi])))
        assert "energy=" in text
        assert "phase=" in text


def test_canonical_phase_range():
    phi = canonical_phase(np.array([-1e-18, -TWO_PI, 3 * TWO_PI + 0.5]))
    assert np.all((phi >= 0.0) & (phi < TWO_PI))
    assert np.isclose(phi[2], 0.5)
