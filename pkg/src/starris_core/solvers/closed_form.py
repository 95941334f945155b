#!/usr/bin/env python3
"""
Closed-Form Auxiliary Block Updates
Element-wise exact minimizers of

    sum_i || theta_tilde_i + vartheta_i ||^2

over STAR-RIS coefficients, where vartheta_i = -theta_i + rho * lambda_i.
Under beta_t^2 + beta_r^2 = 1 this reduces to minimizing
sum_i Re(vartheta_i^H theta_tilde_i), which splits into a phase sub-block
(two-candidate enumeration) and an amplitude sub-block (polar rule).
The projections used by the independent and conventional baselines live
here as well.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import InvalidInputError

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * np.pi
QUARTER_PI = 0.25 * np.pi


def _as_complex_vectors(*vectors: np.ndarray) -> Tuple[np.ndarray, ...]:
    out = tuple(np.atleast_1d(np.asarray(v, dtype=complex)) for v in vectors)
    shapes = {v.shape for v in out}
    if len(shapes) != 1 or out[0].ndim != 1:
        raise InvalidInputError(f"vector length mismatch: {[v.shape for v in out]}")
    return out


@dataclass(frozen=True)
class ElementPhaseProblem:
    """Per-element data of the phase sub-block, vectorized over elements"""

    vt: np.ndarray
    vr: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray

    @classmethod
    def build(
        cls,
        beta_t: np.ndarray,
        beta_r: np.ndarray,
        vartheta_t: np.ndarray,
        vartheta_r: np.ndarray,
    ) -> "ElementPhaseProblem":
        vartheta_t, vartheta_r = _as_complex_vectors(vartheta_t, vartheta_r)
        beta_t = np.asarray(beta_t, dtype=float)
        beta_r = np.asarray(beta_r, dtype=float)
        if beta_t.shape != vartheta_t.shape or beta_r.shape != vartheta_r.shape:
            raise InvalidInputError(
                f"amplitude shapes {beta_t.shape}/{beta_r.shape} do not match "
                f"vartheta shape {vartheta_t.shape}"
            )
        vt = beta_t * vartheta_t
        vr = beta_r * vartheta_r
        return cls(
            vt=vt,
            vr=vr,
            phi_plus=vt.conj() + 1j * vr.conj(),
            phi_minus=vt.conj() - 1j * vr.conj(),
        )

    def candidates(self) -> Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
        # np.angle(0) == 0, which is the convention for degenerate elements
        ang_plus = np.angle(self.phi_plus)
        ang_minus = np.angle(self.phi_minus)
        plus = (np.exp(1j * (np.pi - ang_plus)), np.exp(1j * (1.5 * np.pi - ang_plus)))
        minus = (np.exp(1j * (np.pi - ang_minus)), np.exp(1j * (HALF_PI - ang_minus)))
        return plus, minus

    def objective(self, psi_t: np.ndarray, psi_r: np.ndarray) -> np.ndarray:
        return np.real(self.vt.conj() * psi_t) + np.real(self.vr.conj() * psi_r)


@dataclass(frozen=True)
class ElementAmplitudeProblem:
    """Per-element data of the amplitude sub-block, vectorized over elements"""

    vt: np.ndarray
    vr: np.ndarray
    a: np.ndarray
    b: np.ndarray
    xi: np.ndarray
    omega: np.ndarray
    degenerate: np.ndarray

    @classmethod
    def build(
        cls,
        psi_t: np.ndarray,
        psi_r: np.ndarray,
        vartheta_t: np.ndarray,
        vartheta_r: np.ndarray,
    ) -> "ElementAmplitudeProblem":
        psi_t, psi_r, vartheta_t, vartheta_r = _as_complex_vectors(
            psi_t, psi_r, vartheta_t, vartheta_r
        )
        vt = psi_t.conj() * vartheta_t
        vr = psi_r.conj() * vartheta_r
        a = np.real(vt.conj())
        # + 0.0 turns -0.0 into +0.0 so that sgn(0) := +1 inside arctan2
        b = np.real(vr.conj()) + 0.0
        xi = np.arctan2(b, a)
        degenerate = (a == 0.0) & (b == 0.0)

        omega = np.where(
            xi < -HALF_PI,
            -HALF_PI - xi,
            np.where(xi < QUARTER_PI, 0.0, HALF_PI),
        )
        omega = np.where(degenerate, 0.0, omega)
        return cls(vt=vt, vr=vr, a=a, b=b, xi=xi, omega=omega, degenerate=degenerate)


def update_phases(
    beta_t: np.ndarray,
    beta_r: np.ndarray,
    vartheta_t: np.ndarray,
    vartheta_r: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal unit-modulus phase vectors for fixed amplitudes.

    Each element picks the better of the two closed-form candidate pairs;
    ties go to the phi_plus candidate. The phase gap of the result is
    pi/2 or 3*pi/2 by construction.
    """
    problem = ElementPhaseProblem.build(beta_t, beta_r, vartheta_t, vartheta_r)
    (plus_t, plus_r), (minus_t, minus_r) = problem.candidates()
    obj_plus = problem.objective(plus_t, plus_r)
    obj_minus = problem.objective(minus_t, minus_r)

    take_plus = obj_plus <= obj_minus
    psi_t = np.where(take_plus, plus_t, minus_t)
    psi_r = np.where(take_plus, plus_r, minus_r)
    return psi_t, psi_r


def update_amplitudes(
    psi_t: np.ndarray,
    psi_r: np.ndarray,
    vartheta_t: np.ndarray,
    vartheta_r: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal amplitudes (sin omega, cos omega) for fixed phase vectors"""
    problem = ElementAmplitudeProblem.build(psi_t, psi_r, vartheta_t, vartheta_r)
    if np.any(problem.degenerate):
        logger.debug(
            f"Amplitude update: {int(problem.degenerate.sum())} degenerate element(s) "
            f"set to reflection-only"
        )
    return np.sin(problem.omega), np.cos(problem.omega)


def project_independent(
    vartheta_t: np.ndarray, vartheta_r: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Auxiliary minimizer when only the energy constraint is imposed.

    Phases oppose vartheta; amplitudes follow the Cauchy-Schwarz equality
    case, giving the per-element objective -sqrt(|vt|^2 + |vr|^2).
    """
    vartheta_t, vartheta_r = _as_complex_vectors(vartheta_t, vartheta_r)
    mag_t = np.abs(vartheta_t)
    mag_r = np.abs(vartheta_r)
    norm = np.sqrt(mag_t ** 2 + mag_r ** 2)
    degenerate = norm == 0.0
    if np.any(degenerate):
        logger.debug(
            f"Independent projection: {int(degenerate.sum())} degenerate element(s)"
        )

    safe = np.where(degenerate, 1.0, norm)
    beta_t = np.where(degenerate, 0.0, mag_t / safe)
    beta_r = np.where(degenerate, 1.0, mag_r / safe)
    phase_t = np.where(degenerate, 0.0, np.pi + np.angle(vartheta_t))
    phase_r = np.where(degenerate, 0.0, np.pi + np.angle(vartheta_r))
    return beta_t * np.exp(1j * phase_t), beta_r * np.exp(1j * phase_r)


def project_unit_modulus(vartheta: np.ndarray) -> np.ndarray:
    """argmin over |psi_n| = 1 of Re(conj(vartheta_n) psi_n)"""
    (vartheta,) = _as_complex_vectors(vartheta)
    return np.exp(1j * (np.pi + np.angle(vartheta)))


def auxiliary_objective(
    theta_tilde_t: np.ndarray,
    theta_tilde_r: np.ndarray,
    vartheta_t: np.ndarray,
    vartheta_r: np.ndarray,
) -> float:
    """sum_i || theta_tilde_i + vartheta_i ||^2"""
    return float(
        np.sum(np.abs(theta_tilde_t + vartheta_t) ** 2)
        + np.sum(np.abs(theta_tilde_r + vartheta_r) ** 2)
    )
