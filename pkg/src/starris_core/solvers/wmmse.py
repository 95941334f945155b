#!/usr/bin/env python3
"""
WMMSE Throughput Blocks
Rate, SINR and MSE evaluation for the STAR-RIS downlink together with the
exact block minimizers of the weighted-MSE augmented Lagrangian

    sum_k (varpi_k e_k - ln varpi_k) + 1/(2 rho) sum_i ||theta~_i - theta_i + rho lambda_i||^2

with respect to {varpi, upsilon}, W (power constrained) and {theta_t, theta_r}.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from ..errors import InvalidInputError
from ..generators.channel_generator import ChannelSet
from ..utils.numerics import bisect_decreasing, solve_hpd

logger = logging.getLogger(__name__)

ThetaPair = Tuple[np.ndarray, np.ndarray]

POWER_TOL = 1e-10
NULLSPACE_RTOL = 1e-12


@dataclass
class WmmseState:
    """Beamformers W (M x K), MSE weights varpi (K,), receivers upsilon (K,)"""

    W: np.ndarray
    varpi: np.ndarray
    upsilon: np.ndarray

    @classmethod
    def initial(cls, W: np.ndarray) -> "WmmseState":
        K = W.shape[1]
        return cls(W=np.array(W, dtype=complex), varpi=np.ones(K), upsilon=np.zeros(K, dtype=complex))

    def copy(self) -> "WmmseState":
        return WmmseState(self.W.copy(), self.varpi.copy(), self.upsilon.copy())

    @property
    def power(self) -> float:
        return float(np.real(np.vdot(self.W, self.W)))


@dataclass
class EffectiveChannels:
    """Row k holds hhat_k = theta_i^T diag(h_k^H) G for the side i of user k.

    Built for one (theta_t, theta_r) pair; call `invalidate` when theta moves
    and `refresh` to rebuild.
    """

    channels: ChannelSet
    theta_t: np.ndarray
    theta_r: np.ndarray
    hhat: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.hhat is None:
            self.refresh(self.theta_t, self.theta_r)

    def refresh(self, theta_t: np.ndarray, theta_r: np.ndarray) -> np.ndarray:
        theta_t = np.asarray(theta_t, dtype=complex)
        theta_r = np.asarray(theta_r, dtype=complex)
        N = self.channels.n_elements
        if theta_t.shape != (N,) or theta_r.shape != (N,):
            raise InvalidInputError(
                f"theta shapes {theta_t.shape}/{theta_r.shape} do not match N={N}"
            )
        self.theta_t, self.theta_r = theta_t, theta_r
        is_t = np.array([s == "t" for s in self.channels.side])
        theta_per_user = np.where(is_t[:, None], theta_t[None, :], theta_r[None, :])
        self.hhat = (theta_per_user * self.channels.h.conj()) @ self.channels.G
        return self.hhat

    def invalidate(self) -> None:
        self.hhat = None

    def get(self) -> np.ndarray:
        if self.hhat is None:
            self.refresh(self.theta_t, self.theta_r)
        return self.hhat


ThetaLike = Union[ThetaPair, EffectiveChannels]


def theta_pair(theta: ThetaLike) -> ThetaPair:
    if isinstance(theta, EffectiveChannels):
        return theta.theta_t, theta.theta_r
    return theta[0], theta[1]


def effective_channels(theta: ThetaLike, channels: ChannelSet) -> np.ndarray:
    """K x M matrix of effective channels; a cache built for `channels` is reused"""
    if isinstance(theta, EffectiveChannels):
        if theta.channels is not channels:
            raise InvalidInputError("effective-channel cache was built for a different ChannelSet")
        return theta.get()
    return EffectiveChannels(channels, theta[0], theta[1]).get()


def link_gains(W: np.ndarray, theta: ThetaLike, channels: ChannelSet) -> np.ndarray:
    """S[k, l] = hhat_k w_l"""
    return effective_channels(theta, channels) @ W


def _sinr_from_gains(S: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    power = np.abs(S) ** 2
    signal = np.diag(power)
    interference = power.sum(axis=1) - signal
    return signal / (interference + sigma2)


def sinr_all(W: np.ndarray, theta: ThetaLike, channels: ChannelSet) -> np.ndarray:
    return _sinr_from_gains(link_gains(W, theta, channels), channels.sigma2)


def sinr(k: int, W: np.ndarray, theta: ThetaLike, channels: ChannelSet) -> float:
    """SINR of user k"""
    return float(sinr_all(W, theta, channels)[k])


def sum_rate(W: np.ndarray, theta: ThetaLike, channels: ChannelSet) -> float:
    """Throughput sum_k log2(1 + gamma_k) in bit/s/Hz"""
    return float(np.sum(np.log2(1.0 + sinr_all(W, theta, channels))))


def _mse_from_gains(S: np.ndarray, sigma2: np.ndarray, upsilon: np.ndarray) -> np.ndarray:
    total = np.sum(np.abs(S) ** 2, axis=1) + sigma2
    return (
        np.abs(upsilon) ** 2 * total
        - 2.0 * np.real(upsilon.conj() * np.diag(S))
        + 1.0
    )


def mse_all(state: WmmseState, theta: ThetaLike, channels: ChannelSet) -> np.ndarray:
    return _mse_from_gains(link_gains(state.W, theta, channels), channels.sigma2, state.upsilon)


def mse(k: int, state: WmmseState, theta: ThetaLike, channels: ChannelSet) -> float:
    """MSE e_k of user k for receiver upsilon_k"""
    return float(mse_all(state, theta, channels)[k])


def wmmse_objective(state: WmmseState, theta: ThetaLike, channels: ChannelSet) -> float:
    """sum_k varpi_k e_k - ln varpi_k"""
    e = mse_all(state, theta, channels)
    return float(np.sum(state.varpi * e - np.log(state.varpi)))


def penalty_term(
    theta: ThetaPair,
    theta_tilde: ThetaPair,
    lambdas: ThetaPair,
    rho: float,
) -> float:
    total = 0.0
    for th, tt, lam in zip(theta, theta_tilde, lambdas):
        total += float(np.sum(np.abs(tt - th + rho * lam) ** 2))
    return total / (2.0 * rho)


def al_objective(
    state: WmmseState,
    theta: ThetaLike,
    theta_tilde: ThetaPair,
    lambdas: ThetaPair,
    rho: float,
    channels: ChannelSet,
) -> float:
    """Weighted-MSE augmented Lagrangian"""
    return wmmse_objective(state, theta, channels) + penalty_term(
        theta_pair(theta), theta_tilde, lambdas, rho
    )


def update_weights_receivers(
    state: WmmseState, theta: ThetaLike, channels: ChannelSet
) -> Tuple[np.ndarray, np.ndarray]:
    """MMSE receivers and weights varpi_k = 1 + gamma_k"""
    S = link_gains(state.W, theta, channels)
    total = np.sum(np.abs(S) ** 2, axis=1) + channels.sigma2
    upsilon = np.diag(S) / total
    varpi = 1.0 + _sinr_from_gains(S, channels.sigma2)
    return varpi, upsilon


def update_beamformer(
    state: WmmseState, theta: ThetaLike, channels: ChannelSet, Pt: float
) -> np.ndarray:
    """Exact minimizer of sum_k varpi_k e_k over tr(W W^H) <= Pt.

    w_k = (A + mu I)^-1 varpi_k upsilon_k hhat_k^H with the smallest mu >= 0
    meeting the power budget; mu comes from bisection on the power function.
    """
    hhat = effective_channels(theta, channels)
    M = hhat.shape[1]
    weights = state.varpi * np.abs(state.upsilon) ** 2
    A = hhat.conj().T @ (weights[:, None] * hhat)
    A = 0.5 * (A + A.conj().T)
    B = hhat.conj().T * (state.varpi * state.upsilon)[None, :]

    if not np.any(B):
        logger.warning("Beamformer update: all effective channels/receivers are zero, W = 0")
        return np.zeros((M, hhat.shape[0]), dtype=complex)

    eigvals, U = scipy.linalg.eigh(A)
    eigvals = np.maximum(eigvals, 0.0)
    C = U.conj().T @ B
    null = eigvals <= NULLSPACE_RTOL * max(eigvals[-1], np.finfo(float).tiny)
    coeff = np.where(null, 0.0, np.sum(np.abs(C) ** 2, axis=1))

    def power(mu: float) -> float:
        if mu == 0.0:
            return float(np.sum(coeff[~null] / eigvals[~null] ** 2))
        return float(np.sum(coeff / (eigvals + mu) ** 2))

    if power(0.0) <= Pt:
        if not np.any(null):
            W = solve_hpd(A, B, block="beamformer")
        else:
            inv = np.where(null, 0.0, 1.0 / np.where(null, 1.0, eigvals))
            W = U @ (inv[:, None] * C)
        logger.debug("Beamformer update: power constraint inactive (mu = 0)")
    else:
        hi = 1.0
        while power(hi) > Pt:
            hi *= 2.0
        mu = bisect_decreasing(lambda m: power(m) - Pt, 0.0, hi, tol=POWER_TOL)
        W = solve_hpd(A + mu * np.eye(M), B, block="beamformer")
        logger.debug(f"Beamformer update: bisection mu = {mu:.6e}")
        # active constraint: land exactly on tr(W W^H) = Pt
        return W * np.sqrt(Pt / float(np.real(np.vdot(W, W))))

    used = float(np.real(np.vdot(W, W)))
    if used > Pt:
        W = W * np.sqrt(Pt / used)
    return W


def theta_block_system(
    state: WmmseState, channels: ChannelSet, side: str
) -> Tuple[np.ndarray, np.ndarray]:
    """Quadratic/linear coefficients (A_i, b_i) of sum_{k in K_i} varpi_k e_k in theta_i.

    sum varpi_k e_k = theta_i^H A_i theta_i - 2 Re(b_i^H theta_i) + const.
    """
    users = channels.users_on(side)
    N = channels.n_elements
    if users.size == 0:
        return np.zeros((N, N), dtype=complex), np.zeros(N, dtype=complex)

    GW = channels.G @ state.W
    # C[k, l, :] = diag(h_k^H) G w_l
    C = channels.h[users].conj()[:, None, :] * GW.T[None, :, :]
    d = state.varpi[users] * np.abs(state.upsilon[users]) ** 2
    A = np.einsum("k,kln,klm->nm", d, C.conj(), C)
    own = C[np.arange(users.size), users, :]
    b = np.sum((state.varpi[users] * state.upsilon[users])[:, None] * own.conj(), axis=0)
    return A, b


def update_theta(
    state: WmmseState,
    channels: ChannelSet,
    rho: float,
    lambda_t: np.ndarray,
    lambda_r: np.ndarray,
    theta_tilde: ThetaPair,
) -> ThetaPair:
    """Exact minimizer of the AL over the unconstrained primal coefficients"""
    if not rho > 0:
        raise InvalidInputError(f"penalty factor must be positive, got {rho}")
    N = channels.n_elements
    identity = np.eye(N)
    result = []
    for side, lam, tt in (("t", lambda_t, theta_tilde[0]), ("r", lambda_r, theta_tilde[1])):
        A, b = theta_block_system(state, channels, side)
        target = tt + rho * lam
        lhs = 2.0 * A + identity / rho
        rhs = 2.0 * b + target / rho
        result.append(solve_hpd(lhs, rhs, block=f"theta_{side}"))
    return result[0], result[1]


def matched_filter(theta: ThetaLike, channels: ChannelSet, Pt: float) -> np.ndarray:
    """W = [hhat_1^H, ..., hhat_K^H] scaled to full power"""
    W = effective_channels(theta, channels).conj().T
    norm2 = float(np.real(np.vdot(W, W)))
    if norm2 == 0.0:
        return np.zeros_like(W)
    return W * np.sqrt(Pt / norm2)


def optimize_beamformer(
    theta: ThetaPair,
    channels: ChannelSet,
    Pt: float,
    W0: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> Tuple[WmmseState, float]:
    """Classic WMMSE iterations over {varpi, upsilon} and W with theta held fixed.

    Returns the final state (weights consistent with the returned W) and its rate.
    """
    W = matched_filter(theta, channels, Pt) if W0 is None else np.array(W0, dtype=complex)
    state = WmmseState.initial(W)
    previous = -np.inf
    rate = sum_rate(state.W, theta, channels)
    for _ in range(max_iter):
        state.varpi, state.upsilon = update_weights_receivers(state, theta, channels)
        state.W = update_beamformer(state, theta, channels, Pt)
        rate = sum_rate(state.W, theta, channels)
        if abs(rate - previous) <= tol * max(1.0, abs(rate)):
            break
        previous = rate
    state.varpi, state.upsilon = update_weights_receivers(state, theta, channels)
    return state, rate
