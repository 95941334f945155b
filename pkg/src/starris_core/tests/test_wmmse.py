"""
Tests for the WMMSE evaluators and exact block minimizers
"""

import math

import numpy as np
import pytest

from starris_core.errors import InvalidInputError
from starris_core.solvers.wmmse import (
    EffectiveChannels,
    WmmseState,
    al_objective,
    effective_channels,
    matched_filter,
    mse,
    mse_all,
    optimize_beamformer,
    sinr,
    sinr_all,
    sum_rate,
    update_beamformer,
    update_theta,
    update_weights_receivers,
    wmmse_objective,
)

from .conftest import circular_gaussian, random_channels, random_theta


def loop_sinr(k, W, theta, channels):
    side = 0 if channels.side[k] == "t" else 1
    hhat = np.zeros(channels.n_antennas, dtype=complex)
    for n in range(channels.n_elements):
        hhat += theta[side][n] * np.conj(channels.h[k, n]) * channels.G[n]
    signal = abs(hhat @ W[:, k]) ** 2
    interference = sum(abs(hhat @ W[:, l]) ** 2 for l in range(W.shape[1]) if l != k)
    return signal / (interference + channels.sigma2[k])


def weighted_mse(state, theta, channels):
    return float(np.sum(state.varpi * mse_all(state, theta, channels)))


@pytest.fixture
def problem(rng, small_channels):
    theta = random_theta(rng, small_channels.n_elements)
    W = matched_filter(theta, small_channels, 1.0)
    state = WmmseState.initial(W)
    state.varpi, state.upsilon = update_weights_receivers(state, theta, small_channels)
    return small_channels, theta, state


class TestEvaluators:
    def test_sinr_matches_loop(self, rng, small_channels):
        theta = random_theta(rng, 8)
        W = circular_gaussian(rng, (4, 4))
        for k in range(4):
            assert math.isclose(sinr(k, W, theta, small_channels), loop_sinr(k, W, theta, small_channels), rel_tol=1e-10)

    def test_sum_rate_is_log_sum(self, rng, small_channels):
        theta = random_theta(rng, 8)
        W = circular_gaussian(rng, (4, 4))
        expected = sum(math.log2(1 + loop_sinr(k, W, theta, small_channels)) for k in range(4))
        assert math.isclose(sum_rate(W, theta, small_channels), expected, rel_tol=1e-10)

    def test_effective_channel_cache(self, rng, small_channels):
        theta = random_theta(rng, 8)
        cache = EffectiveChannels(small_channels, *theta)
        first = cache.get().copy()
        cache.invalidate()
        assert np.allclose(cache.get(), first)
        other = random_theta(rng, 8)
        assert np.allclose(cache.refresh(*other), effective_channels(other, small_channels))

    def test_evaluators_accept_cache(self, problem):
        channels, theta, state = problem
        cache = EffectiveChannels(channels, *theta)
        assert sum_rate(state.W, cache, channels) == sum_rate(state.W, theta, channels)
        assert np.array_equal(sinr_all(state.W, cache, channels), sinr_all(state.W, theta, channels))
        assert np.array_equal(mse_all(state, cache, channels), mse_all(state, theta, channels))
        for got, want in zip(
            update_weights_receivers(state, cache, channels),
            update_weights_receivers(state, theta, channels),
        ):
            assert np.array_equal(got, want)
        assert np.allclose(
            update_beamformer(state, cache, channels, 1.0),
            update_beamformer(state, theta, channels, 1.0),
            atol=1e-12,
        )

    def test_al_objective_penalty_reads_cached_theta(self, problem, rng):
        channels, theta, state = problem
        cache = EffectiveChannels(channels, *theta)
        tilde = random_theta(rng, 8)
        lambdas = random_theta(rng, 8)
        assert al_objective(state, cache, tilde, lambdas, 0.5, channels) == pytest.approx(
            al_objective(state, theta, tilde, lambdas, 0.5, channels), rel=1e-12
        )

    def test_cache_bound_to_its_channel_set(self, rng, small_channels):
        cache = EffectiveChannels(small_channels, *random_theta(rng, 8))
        other = random_channels(rng, N=8, M=4, K=4)
        with pytest.raises(InvalidInputError, match="different ChannelSet"):
            effective_channels(cache, other)

    def test_theta_length_checked(self, small_channels):
        with pytest.raises(InvalidInputError):
            effective_channels((np.ones(3), np.ones(3)), small_channels)

    def test_zero_channel_gives_zero_sinr(self, rng):
        channels = random_channels(rng, N=4, M=2, K=2)
        theta = (np.zeros(4), np.zeros(4))
        assert sinr(0, circular_gaussian(rng, (2, 2)), theta, channels) == 0.0


class TestWeightsReceivers:
    def test_mmse_identity(self, problem):
        channels, theta, state = problem
        for k in range(4):
            assert abs(mse(k, state, theta, channels) - 1.0 / state.varpi[k]) < 1e-8

    def test_rate_equals_log_weights(self, problem):
        channels, theta, state = problem
        rate = sum_rate(state.W, theta, channels)
        assert abs(rate - np.sum(np.log2(state.varpi))) < 1e-9

    def test_weights_minimize_objective(self, problem, rng):
        channels, theta, state = problem
        best = wmmse_objective(state, theta, channels)
        for _ in range(20):
            perturbed = state.copy()
            perturbed.varpi = state.varpi * np.exp(0.1 * rng.standard_normal(4))
            perturbed.upsilon = state.upsilon + 0.05 * circular_gaussian(rng, 4) * np.abs(state.upsilon)
            assert wmmse_objective(perturbed, theta, channels) >= best - 1e-12


class TestBeamformer:
    def test_power_budget(self, problem):
        channels, theta, state = problem
        for Pt in (1e-3, 1.0, 1e3):
            W = update_beamformer(state, theta, channels, Pt)
            assert np.real(np.vdot(W, W)) <= Pt + 1e-8

    def test_active_constraint_met_with_equality(self, problem):
        channels, theta, state = problem
        unconstrained = update_beamformer(state, theta, channels, 1e12)
        P0 = float(np.real(np.vdot(unconstrained, unconstrained)))
        Pt = 0.5 * P0
        W = update_beamformer(state, theta, channels, Pt)
        assert abs(np.real(np.vdot(W, W)) - Pt) <= 1e-8 * max(1.0, Pt)

    def test_not_worse_than_feasible_perturbations(self, problem, rng):
        channels, theta, state = problem
        Pt = 1.0
        W = update_beamformer(state, theta, channels, Pt)
        trial = state.copy()
        trial.W = W
        best = weighted_mse(trial, theta, channels)
        for _ in range(50):
            candidate = W + 0.05 * circular_gaussian(rng, W.shape)
            power = float(np.real(np.vdot(candidate, candidate)))
            if power > Pt:
                candidate *= np.sqrt(Pt / power)
            trial.W = candidate
            assert weighted_mse(trial, theta, channels) >= best - 1e-9

    def test_projected_gradient_oracle(self, problem):
        channels, theta, state = problem
        Pt = 0.2
        W = update_beamformer(state, theta, channels, Pt)

        hhat = effective_channels(theta, channels)
        d = state.varpi * np.abs(state.upsilon) ** 2
        A = hhat.conj().T @ (d[:, None] * hhat)
        B = hhat.conj().T * (state.varpi * state.upsilon)[None, :]
        step = 1.0 / np.linalg.eigvalsh(A).max()
        X = np.zeros_like(W)
        for _ in range(20000):
            X = X - step * (A @ X - B)
            power = float(np.real(np.vdot(X, X)))
            if power > Pt:
                X *= np.sqrt(Pt / power)

        trial = state.copy()
        trial.W = W
        ours = weighted_mse(trial, theta, channels)
        trial.W = X
        oracle = weighted_mse(trial, theta, channels)
        assert ours <= oracle + 1e-6 * abs(oracle)

    def test_inactive_constraint_gradient_vanishes(self, problem):
        channels, theta, state = problem
        W = update_beamformer(state, theta, channels, 1e12)
        hhat = effective_channels(theta, channels)
        d = state.varpi * np.abs(state.upsilon) ** 2
        A = hhat.conj().T @ (d[:, None] * hhat)
        B = hhat.conj().T * (state.varpi * state.upsilon)[None, :]
        assert np.linalg.norm(A @ W - B) < 1e-8 * max(1.0, np.linalg.norm(B))

    def test_rank_deficient_channel(self, rng):
        channels = random_channels(rng, N=6, M=4, K=2)
        theta = random_theta(rng, 6)
        state = WmmseState.initial(matched_filter(theta, channels, 1.0))
        state.varpi, state.upsilon = update_weights_receivers(state, theta, channels)
        W = update_beamformer(state, theta, channels, 1e6)
        assert np.all(np.isfinite(W))
        assert np.real(np.vdot(W, W)) <= 1e6 + 1e-8

    def test_zero_channels_give_zero_beamformer(self, rng):
        channels = random_channels(rng, N=4, M=2, K=2)
        theta = (np.zeros(4, dtype=complex), np.zeros(4, dtype=complex))
        state = WmmseState.initial(circular_gaussian(rng, (2, 2)))
        state.varpi, state.upsilon = update_weights_receivers(state, theta, channels)
        W = update_beamformer(state, theta, channels, 1.0)
        assert np.all(W == 0)


class TestThetaUpdate:
    def test_stationary_point_of_al(self, problem, rng):
        channels, theta, state = problem
        rho = 0.7
        lambdas = (circular_gaussian(rng, 8), circular_gaussian(rng, 8))
        tilde = random_theta(rng, 8)
        new_t, new_r = update_theta(state, channels, rho, lambdas[0], lambdas[1], tilde)

        def f(t, r):
            return al_objective(state, (t, r), tilde, lambdas, rho, channels)

        base = f(new_t, new_r)
        h = 1e-5
        for n in range(8):
            for direction in (1.0, 1j):
                e = np.zeros(8, dtype=complex)
                e[n] = h * direction
                grad_t = (f(new_t + e, new_r) - f(new_t - e, new_r)) / (2 * h)
                grad_r = (f(new_t, new_r + e) - f(new_t, new_r - e)) / (2 * h)
                assert abs(grad_t) < 1e-5 * (1.0 + abs(base))
                assert abs(grad_r) < 1e-5 * (1.0 + abs(base))

    def test_never_increases_al(self, problem, rng):
        channels, theta, state = problem
        rho = 0.3
        lambdas = (np.zeros(8, dtype=complex), np.zeros(8, dtype=complex))
        tilde = random_theta(rng, 8)
        before = al_objective(state, theta, tilde, lambdas, rho, channels)
        new_theta = update_theta(state, channels, rho, lambdas[0], lambdas[1], tilde)
        after = al_objective(state, new_theta, tilde, lambdas, rho, channels)
        assert after <= before + 1e-9

    def test_rejects_non_positive_rho(self, problem):
        channels, theta, state = problem
        zeros = np.zeros(8, dtype=complex)
        with pytest.raises(InvalidInputError):
            update_theta(state, channels, 0.0, zeros, zeros, theta)


class TestOptimizeBeamformer:
    def test_rate_not_below_matched_filter(self, rng, small_channels):
        theta = random_theta(rng, 8)
        Pt = 1.0
        start = matched_filter(theta, small_channels, Pt)
        state, rate = optimize_beamformer(theta, small_channels, Pt)
        assert rate >= sum_rate(start, theta, small_channels) - 1e-9
        assert state.power <= Pt + 1e-8
        assert abs(rate - np.sum(np.log2(state.varpi))) < 1e-6
