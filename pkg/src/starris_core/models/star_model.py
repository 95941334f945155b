#!/usr/bin/env python3
"""
STAR-RIS Coefficient Model
Transmission/reflection amplitudes and phases of an N-element STAR-RIS,
polar <-> complex conversion, and the passive lossless constraints
(energy conservation and the coupled phase-shift constraint).
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import InvalidInputError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEFAULT_FEASIBILITY_TOL = 1e-6
AMPLITUDE_SLACK = 1e-12


def canonical_phase(phi: np.ndarray) -> np.ndarray:
    """Map phases into [0, 2*pi)"""
    wrapped = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


@dataclass(frozen=True)
class StarCoefficients:
    """Amplitude/phase representation of the transmission and reflection vectors"""

    beta_t: np.ndarray
    beta_r: np.ndarray
    phi_t: np.ndarray
    phi_r: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("beta_t", "beta_r", "phi_t", "phi_r"):
            value = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if value.ndim != 1:
                raise InvalidInputError(f"{name} must be a vector, got shape {value.shape}")
            if not np.all(np.isfinite(value)):
                raise InvalidInputError(f"{name} contains NaN or Inf entries")
            arrays[name] = value

        lengths = {name: len(v) for name, v in arrays.items()}
        if len(set(lengths.values())) != 1:
            raise InvalidInputError(f"coefficient length mismatch: {lengths}")

        for name in ("beta_t", "beta_r"):
            beta = arrays[name]
            if np.any(beta < -AMPLITUDE_SLACK) or np.any(beta > 1.0 + AMPLITUDE_SLACK):
                raise InvalidInputError(f"{name} must lie in [0, 1]")
            arrays[name] = np.clip(beta, 0.0, 1.0)

        arrays["phi_t"] = canonical_phase(arrays["phi_t"])
        arrays["phi_r"] = canonical_phase(arrays["phi_r"])

        for name, value in arrays.items():
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_elements(self) -> int:
        return len(self.beta_t)

    @classmethod
    def from_signed(
        cls,
        beta_t: np.ndarray,
        phi_t: np.ndarray,
        beta_r: np.ndarray,
        phi_r: np.ndarray,
    ) -> "StarCoefficients":
        """Build from amplitudes that may be negative.

        A negative amplitude -b with phase phi is the same coefficient as
        amplitude b with phase phi + pi.
        """
        beta_t = np.asarray(beta_t, dtype=float)
        beta_r = np.asarray(beta_r, dtype=float)
        phi_t = np.asarray(phi_t, dtype=float) + np.where(beta_t < 0, np.pi, 0.0)
        phi_r = np.asarray(phi_r, dtype=float) + np.where(beta_r < 0, np.pi, 0.0)
        return cls(np.abs(beta_t), np.abs(beta_r), phi_t, phi_r)

    @classmethod
    def from_complex(
        cls, theta_t: np.ndarray, theta_r: np.ndarray
    ) -> "StarCoefficients":
        """Decompose complex coefficient vectors into amplitude and phase"""
        theta_t = np.asarray(theta_t, dtype=complex)
        theta_r = np.asarray(theta_r, dtype=complex)
        if theta_t.shape != theta_r.shape:
            raise InvalidInputError(
                f"theta_t shape {theta_t.shape} differs from theta_r shape {theta_r.shape}"
            )
        return cls(
            np.abs(theta_t), np.abs(theta_r), np.angle(theta_t), np.angle(theta_r)
        )

    def to_complex(self) -> Tuple[np.ndarray, np.ndarray]:
        return to_complex(self)


def to_complex(coeffs: StarCoefficients) -> Tuple[np.ndarray, np.ndarray]:
    """theta_i = beta_i * exp(j phi_i), element-wise"""
    theta_t = coeffs.beta_t * np.exp(1j * coeffs.phi_t)
    theta_r = coeffs.beta_r * np.exp(1j * coeffs.phi_r)
    return theta_t, theta_r


@dataclass(frozen=True)
class ConstraintResiduals:
    """Energy residual beta_t^2 + beta_r^2 - 1 and phase residual cos(phi_t - phi_r)"""

    energy: np.ndarray
    phase: np.ndarray

    @property
    def max_energy(self) -> float:
        return float(np.max(np.abs(self.energy))) if self.energy.size else 0.0

    @property
    def max_phase(self) -> float:
        return float(np.max(np.abs(self.phase))) if self.phase.size else 0.0

    def is_feasible(self, tol: float = DEFAULT_FEASIBILITY_TOL) -> bool:
        return self.max_energy <= tol and self.max_phase <= tol

    def is_energy_feasible(self, tol: float = DEFAULT_FEASIBILITY_TOL) -> bool:
        return self.max_energy <= tol


def constraint_residuals(coeffs: StarCoefficients) -> ConstraintResiduals:
    energy = coeffs.beta_t ** 2 + coeffs.beta_r ** 2 - 1.0
    phase = np.cos(coeffs.phi_t - coeffs.phi_r)
    return ConstraintResiduals(energy=energy, phase=phase)


def phase_differences(coeffs: StarCoefficients) -> np.ndarray:
    """|phi_t - phi_r| per element, in [0, 2*pi)"""
    return np.abs(coeffs.phi_t - coeffs.phi_r)


def random_coupled(
    n_elements: int, rng: np.random.Generator
) -> StarCoefficients:
    """Feasible starting point: equal power split, uniform phases, +/- pi/2 gaps"""
    if n_elements < 1:
        raise InvalidInputError(f"n_elements must be >= 1, got {n_elements}")
    phi_t = rng.uniform(0.0, TWO_PI, size=n_elements)
    offsets = np.where(rng.random(n_elements) < 0.5, 0.5 * np.pi, -0.5 * np.pi)
    beta = np.full(n_elements, np.sqrt(0.5))
    return StarCoefficients(beta, beta.copy(), phi_t, phi_t + offsets)
