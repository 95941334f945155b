#!/usr/bin/env python3
"""
Comparison Schemes
The coupled phase-shift PDD design and the benchmarks it is measured
against. Every scheme consumes the same ChannelSet for a given realization
and starts from the same random draw, so results are paired.

    CoupledPdd        PDD with the coupled auxiliary block
    IndependentStar   PDD with the energy-only projection (upper bound)
    ConventionalRis   PDD on two adjacent transmit-only / reflect-only halves
    PsPscT / PsPscR   primary-secondary configuration derived from IndependentStar
    CoupledAo         per-element exhaustive search on a discrete grid, alternating sides
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import ExperimentConfig
from ..errors import InvalidInputError
from ..generators.channel_generator import ChannelSet
from ..models.star_model import StarCoefficients, TWO_PI, random_coupled, to_complex
from ..solvers.pdd_engine import RunTrace, solve
from ..solvers.throughput import ThroughputProblem
from ..solvers.wmmse import (
    WmmseState,
    link_gains,
    optimize_beamformer,
    sinr_all,
)

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * np.pi
AO_MAX_ROUNDS = 25
AO_IMPROVEMENT_TOL = 1e-6


class SchemeId(Enum):
    """Schemes compared in the throughput-versus-N experiment"""

    COUPLED_PDD = "CoupledPdd"
    COUPLED_AO = "CoupledAo"
    PS_PSC_T = "PsPscT"
    PS_PSC_R = "PsPscR"
    INDEPENDENT_STAR = "IndependentStar"
    CONVENTIONAL_RIS = "ConventionalRis"

    @classmethod
    def parse(cls, name: str) -> "SchemeId":
        try:
            return cls(name)
        except ValueError:
            raise InvalidInputError(
                f"unknown scheme '{name}'; expected one of {[s.value for s in cls]}"
            )

    @property
    def constraint_set(self) -> str:
        """Which feasibility checker applies to this scheme's output"""
        if self is SchemeId.INDEPENDENT_STAR:
            return "independent"
        if self is SchemeId.CONVENTIONAL_RIS:
            return "conventional"
        return "coupled"

    @property
    def uses_pdd(self) -> bool:
        return self in (SchemeId.COUPLED_PDD, SchemeId.INDEPENDENT_STAR, SchemeId.CONVENTIONAL_RIS)


APPROXIMATIONS = {
    SchemeId.COUPLED_AO: "discrete-grid alternating search heuristic",
    SchemeId.PS_PSC_T: "best-of-three secondary-sign heuristic",
    SchemeId.PS_PSC_R: "best-of-three secondary-sign heuristic",
}


@dataclass
class SchemeResult:
    scheme: SchemeId
    coefficients: StarCoefficients
    wmmse: WmmseState = field(repr=False)
    rate: float
    converged: bool = True
    iterations: int = 0
    delta: float = 0.0
    trace: Optional[RunTrace] = field(default=None, repr=False)

    @property
    def approximation(self) -> Optional[str]:
        return APPROXIMATIONS.get(self.scheme)

    def summary(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme.value,
            "rate": self.rate,
            "converged": self.converged,
            "iterations": self.iterations,
            "delta": self.delta,
            "power": self.wmmse.power,
            "approximation": self.approximation,
        }


def init_rng(config: ExperimentConfig, realization: int) -> np.random.Generator:
    """Starting-point generator shared by every scheme of one realization"""
    return np.random.default_rng([config.seed, realization])


def _solve_pdd(
    scheme: SchemeId,
    policy: str,
    channels: ChannelSet,
    config: ExperimentConfig,
    rng: np.random.Generator,
) -> SchemeResult:
    problem = ThroughputProblem(channels, config.system.pt_watts, policy=policy, rng=rng)
    result, trace = solve(problem, config.pdd, label=scheme.value)
    solution = problem.solution()
    return SchemeResult(
        scheme=scheme,
        coefficients=solution.coefficients,
        wmmse=solution.wmmse,
        rate=solution.rate,
        converged=result.converged,
        iterations=result.outer_iterations,
        delta=result.delta,
        trace=trace,
    )


def solve_coupled(
    channels: ChannelSet, config: ExperimentConfig, rng: np.random.Generator
) -> SchemeResult:
    return _solve_pdd(SchemeId.COUPLED_PDD, "coupled", channels, config, rng)


def solve_independent(
    channels: ChannelSet, config: ExperimentConfig, rng: np.random.Generator
) -> SchemeResult:
    return _solve_pdd(SchemeId.INDEPENDENT_STAR, "independent", channels, config, rng)


def solve_conventional(
    channels: ChannelSet, config: ExperimentConfig, rng: np.random.Generator
) -> SchemeResult:
    if channels.n_elements % 2:
        raise InvalidInputError(
            f"ConventionalRis needs an even number of elements, got N={channels.n_elements}"
        )
    return _solve_pdd(SchemeId.CONVENTIONAL_RIS, "conventional", channels, config, rng)


def _secondary_signs_greedy(
    primary: Tuple[np.ndarray, np.ndarray],
    beta_s: np.ndarray,
    channels: ChannelSet,
    W: np.ndarray,
    strongest: int,
) -> np.ndarray:
    """Per-element +/-1 choice growing |hhat_k w_k| of the strongest secondary user"""
    phi_p = primary[1]
    contribution = np.conj(channels.h[strongest]) * (channels.G @ W[:, strongest])
    accumulated = 0.0 + 0.0j
    signs = np.empty(len(phi_p))
    for n in range(len(phi_p)):
        plus = beta_s[n] * np.exp(1j * (phi_p[n] + HALF_PI)) * contribution[n]
        minus = beta_s[n] * np.exp(1j * (phi_p[n] - HALF_PI)) * contribution[n]
        if abs(accumulated + plus) >= abs(accumulated + minus):
            signs[n] = 1.0
            accumulated += plus
        else:
            signs[n] = -1.0
            accumulated += minus
    return signs


def solve_pspsc(
    channels: ChannelSet,
    config: ExperimentConfig,
    rng: np.random.Generator,
    primary_side: str = "t",
) -> SchemeResult:
    """Keep the independent design on the primary side, derive the secondary side.

    Secondary amplitudes are sqrt(1 - beta_p^2) and secondary phases sit at
    phi_p +/- pi/2. Three sign patterns are tried (greedy, all +, all -) and
    the one with the best rate after WMMSE with theta fixed is kept.
    """
    if primary_side not in ("t", "r"):
        raise InvalidInputError(f"primary side must be 't' or 'r', got '{primary_side}'")
    scheme = SchemeId.PS_PSC_T if primary_side == "t" else SchemeId.PS_PSC_R
    secondary_side = "r" if primary_side == "t" else "t"

    independent = solve_independent(channels, config, rng)
    coeffs = independent.coefficients
    if primary_side == "t":
        primary = (np.array(coeffs.beta_t), np.array(coeffs.phi_t))
    else:
        primary = (np.array(coeffs.beta_r), np.array(coeffs.phi_r))
    beta_s = np.sqrt(np.clip(1.0 - primary[0] ** 2, 0.0, 1.0))

    normalized = channels.normalized()
    secondary_users = normalized.users_on(secondary_side)
    if secondary_users.size:
        gamma = sinr_all(independent.wmmse.W, to_complex(coeffs), normalized)
        strongest = int(secondary_users[np.argmax(gamma[secondary_users])])
        greedy = _secondary_signs_greedy(
            primary, beta_s, normalized, independent.wmmse.W, strongest
        )
    else:
        greedy = np.ones_like(beta_s)

    options = {"greedy": greedy, "plus": np.ones_like(beta_s), "minus": -np.ones_like(beta_s)}
    best: Optional[SchemeResult] = None
    best_label = ""
    Pt = config.system.pt_watts
    for label, signs in options.items():
        phi_s = primary[1] + signs * HALF_PI
        if primary_side == "t":
            candidate = StarCoefficients(primary[0], beta_s, primary[1], phi_s)
        else:
            candidate = StarCoefficients(beta_s, primary[0], phi_s, primary[1])
        state, rate = optimize_beamformer(
            to_complex(candidate), normalized, Pt, W0=independent.wmmse.W
        )
        if best is None or rate > best.rate:
            best = SchemeResult(
                scheme=scheme,
                coefficients=candidate,
                wmmse=state,
                rate=rate,
                converged=independent.converged,
                iterations=independent.iterations,
                delta=0.0,
            )
            best_label = label
    logger.debug(f"{scheme.value}: kept '{best_label}' secondary phase pattern, rate={best.rate:.4f}")
    return best


@dataclass
class _PolarGrid:
    """Every (beta, phi) pair of one element the discrete search may pick"""

    beta_t: np.ndarray
    beta_r: np.ndarray
    phi_t: np.ndarray
    phi_r: np.ndarray

    @classmethod
    def build(cls, n_amp: int, n_phase: int, side: str) -> "_PolarGrid":
        beta = np.linspace(0.0, 1.0, n_amp)
        phi = TWO_PI * np.arange(n_phase) / n_phase
        offset = np.array([HALF_PI, -HALF_PI])
        B, P, O = (a.ravel() for a in np.meshgrid(beta, phi, offset, indexing="ij"))
        partner_beta = np.sqrt(np.clip(1.0 - B ** 2, 0.0, 1.0))
        if side == "t":
            return cls(B, partner_beta, P, P + O)
        return cls(partner_beta, B, P + O, P)

    @property
    def theta_t(self) -> np.ndarray:
        return self.beta_t * np.exp(1j * self.phi_t)

    @property
    def theta_r(self) -> np.ndarray:
        return self.beta_r * np.exp(1j * self.phi_r)


def _ao_pass(polar: Dict[str, np.ndarray], channels: ChannelSet, W: np.ndarray, grid: _PolarGrid) -> float:
    """One sweep over all elements with W fixed; updates `polar` in place, returns rate"""
    is_t = np.array([s == "t" for s in channels.side])
    theta_t = polar["beta_t"] * np.exp(1j * polar["phi_t"])
    theta_r = polar["beta_r"] * np.exp(1j * polar["phi_r"])
    S = link_gains(W, (theta_t, theta_r), channels)
    GW = channels.G @ W
    cand_t, cand_r = grid.theta_t, grid.theta_r
    sigma2 = channels.sigma2

    def rates(S_batch: np.ndarray) -> np.ndarray:
        power = np.abs(S_batch) ** 2
        signal = np.diagonal(power, axis1=-2, axis2=-1)
        interference = power.sum(axis=-1) - signal
        return np.sum(np.log2(1.0 + signal / (interference + sigma2)), axis=-1)

    current = float(rates(S[None])[0])
    for n in range(channels.n_elements):
        # D[k, l] = conj(h_kn) (G W)_nl
        D = np.conj(channels.h[:, n])[:, None] * GW[n][None, :]
        delta = np.where(
            is_t[None, :], (cand_t - theta_t[n])[:, None], (cand_r - theta_r[n])[:, None]
        )
        S_batch = S[None] + delta[:, :, None] * D[None]
        r = rates(S_batch)
        best = int(np.argmax(r))
        if r[best] > current + 1e-12 * max(1.0, abs(current)):
            S = S_batch[best]
            theta_t[n], theta_r[n] = cand_t[best], cand_r[best]
            for name in ("beta_t", "beta_r", "phi_t", "phi_r"):
                polar[name][n] = getattr(grid, name)[best]
            current = float(r[best])
    return current


def solve_ao(
    channels: ChannelSet,
    config: ExperimentConfig,
    rng: np.random.Generator,
    levels: Optional[Tuple[int, int]] = None,
) -> SchemeResult:
    """Alternating per-side discrete search under the coupled constraints.

    A round is a transmit-side pass followed by a reflection-side pass, each
    with W fixed and WMMSE re-run afterwards. The search stops after a round
    without rate improvement.
    """
    n_amp, n_phase = levels if levels is not None else config.ao_levels
    if n_amp < 2 or n_phase < 2:
        raise InvalidInputError(f"AO grid levels must be >= 2, got {(n_amp, n_phase)}")

    normalized = channels.normalized()
    Pt = config.system.pt_watts
    start = random_coupled(normalized.n_elements, rng)
    polar = {name: np.array(getattr(start, name)) for name in ("beta_t", "beta_r", "phi_t", "phi_r")}
    state, rate = optimize_beamformer(to_complex(start), normalized, Pt)
    grids = {side: _PolarGrid.build(n_amp, n_phase, side) for side in ("t", "r")}

    best_rate, best_polar, best_state = rate, {k: v.copy() for k, v in polar.items()}, state.copy()
    converged = False
    rounds = 0
    for rounds in range(1, AO_MAX_ROUNDS + 1):
        round_start = best_rate
        for side in ("t", "r"):
            _ao_pass(polar, normalized, state.W, grids[side])
            theta = (polar["beta_t"] * np.exp(1j * polar["phi_t"]), polar["beta_r"] * np.exp(1j * polar["phi_r"]))
            state, rate = optimize_beamformer(theta, normalized, Pt, W0=state.W)
            if rate > best_rate:
                best_rate, best_polar, best_state = rate, {k: v.copy() for k, v in polar.items()}, state.copy()
        logger.debug(f"CoupledAo round {rounds}: rate={best_rate:.6f}")
        if best_rate - round_start <= AO_IMPROVEMENT_TOL * max(1.0, abs(best_rate)):
            converged = True
            break

    return SchemeResult(
        scheme=SchemeId.COUPLED_AO,
        coefficients=StarCoefficients(
            best_polar["beta_t"], best_polar["beta_r"], best_polar["phi_t"], best_polar["phi_r"]
        ),
        wmmse=best_state,
        rate=best_rate,
        converged=converged,
        iterations=rounds,
        delta=0.0,
    )


def run_scheme(
    scheme: SchemeId,
    channels: ChannelSet,
    config: ExperimentConfig,
    realization: int = 0,
) -> SchemeResult:
    """Dispatch one scheme on one channel realization"""
    rng = init_rng(config, realization)
    if scheme is SchemeId.COUPLED_PDD:
        return solve_coupled(channels, config, rng)
    if scheme is SchemeId.INDEPENDENT_STAR:
        return solve_independent(channels, config, rng)
    if scheme is SchemeId.CONVENTIONAL_RIS:
        return solve_conventional(channels, config, rng)
    if scheme is SchemeId.PS_PSC_T:
        return solve_pspsc(channels, config, rng, primary_side="t")
    if scheme is SchemeId.PS_PSC_R:
        return solve_pspsc(channels, config, rng, primary_side="r")
    return solve_ao(channels, config, rng)


def parse_schemes(names: List[str]) -> List[SchemeId]:
    return [SchemeId.parse(name) for name in names]
