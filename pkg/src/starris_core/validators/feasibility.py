#!/usr/bin/env python3
"""
Scheme Output Validation
Re-checks every scheme result against the constraint set it claims to
satisfy before anything is written to disk:

    coupled       energy conservation and cos(phi_t - phi_r) = 0
    independent   energy conservation
    conventional  {0, 1} amplitude pattern, first half transmit-only
    all           tr(W W^H) <= Pt
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..errors import FeasibilityError
from ..models.star_model import StarCoefficients, constraint_residuals

logger = logging.getLogger(__name__)

ENERGY_TOL = 1e-8
PHASE_TOL = 1e-5
POWER_TOL = 1e-8


@dataclass
class FeasibilityReport:
    scheme: str
    constraint_set: str
    errors: List[str] = field(default_factory=list)
    max_energy_residual: float = 0.0
    max_phase_residual: float = 0.0
    power: float = 0.0

    @property
    def error_count(self) -> int:
        return len(self.errors)

    @property
    def is_valid(self) -> bool:
        return not self.errors

    def raise_if_invalid(self) -> None:
        if self.errors:
            raise FeasibilityError(f"{self.scheme}: " + "; ".join(self.errors))


def validate_scheme_output(
    scheme: str,
    constraint_set: str,
    coefficients: StarCoefficients,
    W: np.ndarray,
    Pt: float,
) -> FeasibilityReport:
    """Check one scheme's coefficients and beamformer; never raises"""
    report = FeasibilityReport(scheme=scheme, constraint_set=constraint_set)
    residuals = constraint_residuals(coefficients)
    report.max_energy_residual = residuals.max_energy
    report.max_phase_residual = residuals.max_phase
    report.power = float(np.real(np.vdot(W, W)))

    if report.power > Pt + POWER_TOL * max(1.0, Pt):
        report.errors.append(f"transmit power {report.power:.6e} exceeds budget {Pt:.6e}")

    if constraint_set in ("coupled", "independent", "conventional"):
        if residuals.max_energy > ENERGY_TOL:
            report.errors.append(f"energy residual {residuals.max_energy:.3e} > {ENERGY_TOL:g}")

    if constraint_set == "coupled" and residuals.max_phase > PHASE_TOL:
        report.errors.append(f"coupled phase residual {residuals.max_phase:.3e} > {PHASE_TOL:g}")

    if constraint_set == "conventional":
        N = coefficients.n_elements
        if N % 2:
            report.errors.append(f"conventional layout needs even N, got {N}")
        else:
            expected_t = np.concatenate([np.ones(N // 2), np.zeros(N // 2)])
            deviation = max(
                float(np.max(np.abs(coefficients.beta_t - expected_t))),
                float(np.max(np.abs(coefficients.beta_r - (1.0 - expected_t)))),
            )
            if deviation > ENERGY_TOL:
                report.errors.append(f"amplitude pattern deviates from {{0, 1}} layout by {deviation:.3e}")

    if constraint_set not in ("coupled", "independent", "conventional"):
        report.errors.append(f"unknown constraint set '{constraint_set}'")

    if report.errors:
        logger.warning(f"Feasibility check failed for {scheme}: {report.errors}")
    else:
        logger.debug(
            f"{scheme} feasible: energy={report.max_energy_residual:.2e}, "
            f"phase={report.max_phase_residual:.2e}, power={report.power:.4e}"
        )
    return report
