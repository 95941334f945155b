#!/usr/bin/env python3
"""
Rician Channel Generator
Builds the simulated STAR-RIS downlink: a BS uniform linear array 50 m away
from the surface, half of the users on the transmission side and half on
the reflection side, distance-dependent path loss and Rician fading.
Realization r of a configuration is drawn from PCG64 seeded with seed + r,
so every scheme sees the same channels for a given (config, r).
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from ..config import SystemConfig
from ..errors import InvalidInputError

logger = logging.getLogger(__name__)

USER_SPAN_DEG = (15.0, 165.0)


@dataclass(frozen=True)
class ChannelSet:
    """BS->RIS matrix G (N x M), RIS->user channels h (K x N), noise powers, sides"""

    G: np.ndarray
    h: np.ndarray
    sigma2: np.ndarray
    side: Tuple[str, ...]

    def __post_init__(self):
        G = np.asarray(self.G, dtype=complex)
        h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        sigma2 = np.atleast_1d(np.asarray(self.sigma2, dtype=float))
        if G.ndim != 2:
            raise InvalidInputError(f"G must be a matrix, got shape {G.shape}")
        if h.shape[1] != G.shape[0]:
            raise InvalidInputError(
                f"user channels have {h.shape[1]} entries but G has {G.shape[0]} rows"
            )
        if sigma2.shape != (h.shape[0],) or len(self.side) != h.shape[0]:
            raise InvalidInputError("sigma2/side must have one entry per user")
        if np.any(sigma2 <= 0):
            raise InvalidInputError("noise powers must be positive")
        if any(s not in ("t", "r") for s in self.side):
            raise InvalidInputError(f"side labels must be 't' or 'r', got {self.side}")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "side", tuple(self.side))

    @property
    def n_elements(self) -> int:
        return self.G.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.G.shape[1]

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    def users_on(self, side: str) -> np.ndarray:
        return np.array([k for k, s in enumerate(self.side) if s == side], dtype=int)

    def normalized(self) -> "ChannelSet":
        """Noise-normalized copy: h_k / sigma_k and unit noise power.

        SINRs and rates are unchanged.
        """
        scale = 1.0 / np.sqrt(self.sigma2)
        return replace(self, h=self.h * scale[:, None], sigma2=np.ones_like(self.sigma2))


def pathloss_linear(d_m: float, config: SystemConfig) -> float:
    """10^(-PL0/10) * d^(-exponent)"""
    if not d_m > 0:
        raise InvalidInputError(f"distance must be positive, got {d_m}")
    return 10.0 ** (-config.pl0_db / 10.0) * d_m ** (-config.path_loss_exponent)


def steering_vector(n: int, angle_rad: float) -> np.ndarray:
    """Half-wavelength ULA response, angle measured from the array axis"""
    return np.exp(1j * np.pi * np.arange(n) * np.cos(angle_rad))


def user_angles(config: SystemConfig) -> np.ndarray:
    """Angles (radians) of the users on one half-circle, equally spaced"""
    per_side = config.K // 2
    lo, hi = USER_SPAN_DEG
    steps = np.arange(1, per_side + 1) / (per_side + 1)
    return np.deg2rad(lo + (hi - lo) * steps)


def _rician_weights(kappa: float) -> Tuple[float, float]:
    if math.isinf(kappa):
        return 1.0, 0.0
    return math.sqrt(kappa / (1.0 + kappa)), math.sqrt(1.0 / (1.0 + kappa))


def _circular_gaussian(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_channels(config: SystemConfig, realization: int = 0) -> ChannelSet:
    """Draw one channel realization for `config`"""
    rng = np.random.default_rng(config.seed + realization)
    los_w, nlos_w = _rician_weights(config.kappa)
    N, M, K = config.N, config.M, config.K

    aoa = np.deg2rad(config.bs_angle_deg)
    # BS array axis parallel to the surface; the departure direction points back at it
    aod = np.pi - aoa
    G_los = np.outer(steering_vector(N, aoa), steering_vector(M, aod).conj())
    G_nlos = _circular_gaussian(rng, (N, M))
    G = math.sqrt(pathloss_linear(config.bs_distance_m, config)) * (
        los_w * G_los + nlos_w * G_nlos
    )

    angles = user_angles(config)
    # Transmission-side users mirror the reflection-side ones behind the surface
    user_dirs = np.concatenate([-angles, angles])
    h_los = np.stack([steering_vector(N, a) for a in user_dirs])
    h_nlos = _circular_gaussian(rng, (K, N))
    h = math.sqrt(pathloss_linear(config.user_radius_m, config)) * (
        los_w * h_los + nlos_w * h_nlos
    )

    sigma2 = np.full(K, config.noise_watts)
    side = tuple(["t"] * (K // 2) + ["r"] * (K // 2))
    logger.debug(
        f"Generated channels: N={N}, M={M}, K={K}, realization={realization}, "
        f"|G|_F={np.linalg.norm(G):.3e}"
    )
    return ChannelSet(G=G, h=h, sigma2=sigma2, side=side)
