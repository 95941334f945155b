"""
Shared fixtures: seeded generators and small unit-noise channel sets
"""

import numpy as np
import pytest

from starris_core.config import ExperimentConfig, PddConfig, SystemConfig
from starris_core.generators.channel_generator import ChannelSet


def circular_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_channels(rng: np.random.Generator, N: int = 8, M: int = 4, K: int = 4) -> ChannelSet:
    """Unit-noise channels with half the users on each side"""
    side = tuple(["t"] * (K // 2) + ["r"] * (K - K // 2))
    return ChannelSet(
        G=circular_gaussian(rng, (N, M)),
        h=circular_gaussian(rng, (K, N)),
        sigma2=np.ones(K),
        side=side,
    )


def random_theta(rng: np.random.Generator, N: int):
    return circular_gaussian(rng, N), circular_gaussian(rng, N)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_channels(rng):
    return random_channels(rng, N=8, M=4, K=4)


@pytest.fixture
def tiny_config(tmp_path):
    """Small system so full scheme runs stay fast"""
    return ExperimentConfig(
        system=SystemConfig(M=2, N=4, K=2, seed=3),
        pdd=PddConfig(outer_max_iter=400),
        schemes=("CoupledPdd", "IndependentStar", "ConventionalRis"),
        n_values=(2, 4),
        k_values=(2,),
        convergence_k_values=(2,),
        realizations=2,
        output=str(tmp_path / "results"),
        ao_levels=(3, 4),
    )
