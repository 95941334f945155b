#!/usr/bin/env python3
"""
Throughput Maximization Problem
Binds the WMMSE blocks and the closed-form auxiliary updates to the PDD
engine. The auxiliary policy selects which constraint set the auxiliary
coefficients live in:

    coupled       energy conservation + coupled phase shifts (two sub-blocks)
    independent   energy conservation only
    conventional  first N/2 elements transmit-only, the rest reflect-only
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..errors import InvalidInputError
from ..generators.channel_generator import ChannelSet
from ..models.star_model import (
    StarCoefficients,
    TWO_PI,
    phase_differences,
    random_coupled,
)
from .closed_form import (
    project_independent,
    project_unit_modulus,
    update_amplitudes,
    update_phases,
)
from .pdd_engine import BlockUpdate, PddState, ProblemAdapter
from .wmmse import (
    EffectiveChannels,
    WmmseState,
    al_objective,
    matched_filter,
    sum_rate,
    update_beamformer,
    update_theta,
    update_weights_receivers,
)

logger = logging.getLogger(__name__)

POLICIES = ("coupled", "independent", "conventional")


def conventional_pattern(n_elements: int) -> Tuple[np.ndarray, np.ndarray]:
    """Amplitudes of two adjacent transmit-only / reflect-only half surfaces"""
    if n_elements % 2:
        raise InvalidInputError(
            f"conventional RIS split needs an even element count, got N={n_elements}"
        )
    half = n_elements // 2
    beta_t = np.concatenate([np.ones(half), np.zeros(half)])
    return beta_t, 1.0 - beta_t


def initial_coefficients(
    n_elements: int, policy: str, rng: np.random.Generator
) -> StarCoefficients:
    if policy == "conventional":
        beta_t, beta_r = conventional_pattern(n_elements)
        phi = rng.uniform(0.0, TWO_PI, size=n_elements)
        return StarCoefficients(beta_t, beta_r, phi, phi.copy())
    return random_coupled(n_elements, rng)


@dataclass
class ThroughputSolution:
    coefficients: StarCoefficients
    wmmse: WmmseState
    rate: float


class ThroughputProblem(ProblemAdapter):
    """Sum-rate maximization over (W, theta_t, theta_r) in PDD form"""

    def __init__(
        self,
        channels: ChannelSet,
        Pt: float,
        policy: str = "coupled",
        rng: Optional[np.random.Generator] = None,
        initial: Optional[StarCoefficients] = None,
    ):
        if policy not in POLICIES:
            raise InvalidInputError(f"unknown auxiliary policy '{policy}'; expected one of {POLICIES}")
        if not Pt > 0:
            raise InvalidInputError(f"transmit power must be positive, got {Pt}")

        self.channels = channels.normalized()
        self.Pt = Pt
        self.policy = policy
        self.n_elements = self.channels.n_elements
        if policy == "conventional":
            self._pattern = conventional_pattern(self.n_elements)

        if initial is None:
            initial = initial_coefficients(
                self.n_elements, policy, rng if rng is not None else np.random.default_rng()
            )
        elif initial.n_elements != self.n_elements:
            raise InvalidInputError(
                f"initial coefficients have {initial.n_elements} elements, channels have {self.n_elements}"
            )

        self.beta_t = np.array(initial.beta_t)
        self.beta_r = np.array(initial.beta_r)
        self.psi_t = np.exp(1j * np.array(initial.phi_t))
        self.psi_r = np.exp(1j * np.array(initial.phi_r))
        self.tilde_t = self.beta_t * self.psi_t
        self.tilde_r = self.beta_r * self.psi_r
        self.theta_t = self.tilde_t.copy()
        self.theta_r = self.tilde_r.copy()
        self._hhat = EffectiveChannels(self.channels, self.theta_t, self.theta_r)
        self.wmmse = WmmseState.initial(matched_filter(self._hhat, self.channels, Pt))
        self._finalized = False

    # --- PDD hooks -----------------------------------------------------

    def primal(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.theta_t, self.theta_r

    def auxiliary(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.tilde_t, self.tilde_r

    def al_objective(self, state: PddState) -> float:
        return al_objective(
            self.wmmse, self._hhat, self.auxiliary(), state.lambdas, state.rho, self.channels
        )

    def objective(self) -> float:
        return sum_rate(self.wmmse.W, self._hhat, self.channels)

    def blocks(self) -> List[Tuple[str, BlockUpdate]]:
        blocks: List[Tuple[str, BlockUpdate]] = [
            ("weights_receivers", self._update_weights),
            ("beamformer", self._update_beamformer),
            ("theta", self._update_theta),
        ]
        if self.policy == "coupled":
            blocks += [
                ("aux_phases", self._update_aux_phases),
                ("aux_amplitudes", self._update_aux_amplitudes),
            ]
        elif self.policy == "independent":
            blocks.append(("aux_independent", self._update_aux_independent))
        else:
            blocks.append(("aux_conventional", self._update_aux_conventional))
        return blocks

    def snapshot(self) -> Dict[str, Any]:
        arrays = {
            name: getattr(self, name).copy()
            for name in ("beta_t", "beta_r", "psi_t", "psi_r", "tilde_t", "tilde_r", "theta_t", "theta_r")
        }
        arrays["wmmse"] = self.wmmse.copy()
        return arrays

    def restore(self, snapshot: Dict[str, Any]) -> None:
        for name, value in snapshot.items():
            setattr(self, name, value.copy())
        self._hhat.refresh(self.theta_t, self.theta_r)

    def finalize(self, state: PddState) -> None:
        """theta <- theta~, then weights -> W -> weights on the feasible point"""
        self._finalized = True
        self.theta_t = self.tilde_t.copy()
        self.theta_r = self.tilde_r.copy()
        self._hhat.refresh(self.theta_t, self.theta_r)
        self._update_weights(state)
        self._update_beamformer(state)
        self._update_weights(state)

    def phase_gaps(self) -> np.ndarray:
        if self._finalized:
            return self.final_phase_gaps()
        return super().phase_gaps()

    # --- blocks --------------------------------------------------------

    def _update_weights(self, state: PddState) -> None:
        self.wmmse.varpi, self.wmmse.upsilon = update_weights_receivers(
            self.wmmse, self._hhat, self.channels
        )

    def _update_beamformer(self, state: PddState) -> None:
        self.wmmse.W = update_beamformer(self.wmmse, self._hhat, self.channels, self.Pt)

    def _update_theta(self, state: PddState) -> None:
        self.theta_t, self.theta_r = update_theta(
            self.wmmse, self.channels, state.rho, state.lambda_t, state.lambda_r, self.auxiliary()
        )
        self._hhat.refresh(self.theta_t, self.theta_r)

    def _vartheta(self, state: PddState) -> Tuple[np.ndarray, np.ndarray]:
        return -self.theta_t + state.rho * state.lambda_t, -self.theta_r + state.rho * state.lambda_r

    def _sync_tilde(self) -> None:
        self.tilde_t = self.beta_t * self.psi_t
        self.tilde_r = self.beta_r * self.psi_r

    def _update_aux_phases(self, state: PddState) -> None:
        vt, vr = self._vartheta(state)
        self.psi_t, self.psi_r = update_phases(self.beta_t, self.beta_r, vt, vr)
        self._sync_tilde()

    def _update_aux_amplitudes(self, state: PddState) -> None:
        vt, vr = self._vartheta(state)
        self.beta_t, self.beta_r = update_amplitudes(self.psi_t, self.psi_r, vt, vr)
        self._sync_tilde()

    def _update_aux_independent(self, state: PddState) -> None:
        vt, vr = self._vartheta(state)
        self.tilde_t, self.tilde_r = project_independent(vt, vr)

    def _update_aux_conventional(self, state: PddState) -> None:
        vt, vr = self._vartheta(state)
        beta_t, beta_r = self._pattern
        self.tilde_t = beta_t * project_unit_modulus(vt)
        self.tilde_r = beta_r * project_unit_modulus(vr)

    # --- results -------------------------------------------------------

    def coefficients(self) -> StarCoefficients:
        """Auxiliary (feasible) coefficients in polar form"""
        if self.policy == "coupled":
            return StarCoefficients(
                self.beta_t, self.beta_r, np.angle(self.psi_t), np.angle(self.psi_r)
            )
        return StarCoefficients.from_complex(self.tilde_t, self.tilde_r)

    def final_phase_gaps(self) -> np.ndarray:
        return phase_differences(self.coefficients())

    def solution(self) -> ThroughputSolution:
        theta = self.auxiliary()
        return ThroughputSolution(
            coefficients=self.coefficients(),
            wmmse=self.wmmse.copy(),
            rate=sum_rate(self.wmmse.W, theta, self.channels),
        )
