"""
Tests for the Rician channel generator
"""

import dataclasses
import math

import numpy as np
import pytest

from starris_core.config import SystemConfig
from starris_core.errors import InvalidInputError
from starris_core.generators.channel_generator import (
    ChannelSet,
    generate_channels,
    pathloss_linear,
    user_angles,
)
from starris_core.solvers.wmmse import sum_rate

from .conftest import circular_gaussian, random_theta


class TestPathloss:
    def test_reference_value(self):
        config = SystemConfig()
        assert math.isclose(pathloss_linear(1.0, config), 1e-3)

    def test_zero_exponent_is_distance_free(self):
        config = SystemConfig(path_loss_exponent=0.0)
        assert math.isclose(pathloss_linear(3.0, config), pathloss_linear(50.0, config))

    def test_decreasing_in_distance(self):
        config = SystemConfig()
        assert pathloss_linear(50.0, config) < pathloss_linear(3.0, config)

    def test_non_positive_distance(self):
        with pytest.raises(InvalidInputError):
            pathloss_linear(0.0, SystemConfig())


class TestGenerateChannels:
    def test_shapes_and_sides(self):
        config = SystemConfig(M=8, N=20, K=6)
        channels = generate_channels(config)
        assert channels.G.shape == (20, 8)
        assert channels.h.shape == (6, 20)
        assert channels.side == ("t", "t", "t", "r", "r", "r")
        assert list(channels.users_on("t")) == [0, 1, 2]
        assert np.allclose(channels.sigma2, config.noise_watts)

    def test_deterministic_per_realization(self):
        config = SystemConfig(seed=11)
        a = generate_channels(config, realization=2)
        b = generate_channels(config, realization=2)
        c = generate_channels(config, realization=3)
        assert np.array_equal(a.G, b.G) and np.array_equal(a.h, b.h)
        assert not np.array_equal(a.h, c.h)

    def test_pure_line_of_sight(self):
        config = SystemConfig(rician_db=math.inf)
        a = generate_channels(config, realization=0)
        b = generate_channels(config, realization=5)
        assert np.allclose(a.G, b.G)
        assert np.allclose(a.h, b.h)

    def test_user_angles_inside_half_plane(self):
        angles = user_angles(SystemConfig(K=6))
        assert len(angles) == 3
        assert np.all((angles > 0) & (angles < np.pi))

    def test_average_gain_follows_pathloss(self):
        config = SystemConfig(N=64, K=8)
        # 20 realizations x 8 users = 160 vectors; E||h||^2 = N * PL
        norms = np.concatenate(
            [np.sum(np.abs(generate_channels(config, r).h) ** 2, axis=1) for r in range(20)]
        )
        expected = config.N * pathloss_linear(config.user_radius_m, config)
        assert abs(np.mean(norms) / expected - 1.0) < 0.05

    def test_scattered_component_variance(self):
        kappa = 2.0
        config = SystemConfig(N=64, K=8, rician_db=10.0 * math.log10(kappa))
        los = generate_channels(dataclasses.replace(config, rician_db=math.inf)).h
        mean = math.sqrt(kappa / (1.0 + kappa)) * los
        # 20 x 8 x 64 = 10240 entries
        deviations = np.concatenate(
            [(generate_channels(config, r).h - mean).ravel() for r in range(20)]
        )
        expected = pathloss_linear(config.user_radius_m, config) / (1.0 + kappa)
        assert abs(np.mean(np.abs(deviations) ** 2) / expected - 1.0) < 0.05

    def test_line_of_sight_entries_have_pathloss_modulus(self):
        config = SystemConfig(N=16, K=4, rician_db=math.inf)
        channels = generate_channels(config)
        h_scale = math.sqrt(pathloss_linear(config.user_radius_m, config))
        G_scale = math.sqrt(pathloss_linear(config.bs_distance_m, config))
        assert np.allclose(np.abs(channels.h) / h_scale, 1.0, atol=1e-12)
        assert np.allclose(np.abs(channels.G) / G_scale, 1.0, atol=1e-12)

    def test_rayleigh_channels_are_random(self):
        config = SystemConfig(N=16, K=4, rician_db=-math.inf)
        a = generate_channels(config, realization=0)
        b = generate_channels(config, realization=1)
        assert not np.allclose(np.abs(a.h), np.abs(b.h))
        assert np.std(np.abs(a.h)) > 0.0


class TestChannelSet:
    def test_normalization_preserves_rate(self, rng):
        channels = ChannelSet(
            G=circular_gaussian(rng, (6, 3)),
            h=circular_gaussian(rng, (2, 6)),
            sigma2=np.array([0.3, 2.0]),
            side=("t", "r"),
        )
        W = circular_gaussian(rng, (3, 2))
        theta = random_theta(rng, 6)
        normalized = channels.normalized()
        assert np.allclose(normalized.sigma2, 1.0)
        assert math.isclose(sum_rate(W, theta, channels), sum_rate(W, theta, normalized), rel_tol=1e-12)

    def test_rejects_bad_side_label(self, rng):
        with pytest.raises(InvalidInputError):
            ChannelSet(
                G=circular_gaussian(rng, (4, 2)),
                h=circular_gaussian(rng, (2, 4)),
                sigma2=np.ones(2),
                side=("t", "x"),
            )

    def test_rejects_dimension_mismatch(self, rng):
        with pytest.raises(InvalidInputError):
            ChannelSet(
                G=circular_gaussian(rng, (4, 2)),
                h=circular_gaussian(rng, (2, 5)),
                sigma2=np.ones(2),
                side=("t", "r"),
            )
