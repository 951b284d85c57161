"""
Test cases for BIA user rates and per-link rates
"""

import math

import numpy as np
import pytest

from owc_alloc.bia.rates import link_rates, noise_covariance, per_link_rate, rate_matrix, user_rate
from owc_alloc.channel.model import ChannelMatrix
from owc_alloc.utils.errors import DegenerateGeometryError, InvalidParameterError, UnsupportedConfigurationError
from tests.test_utils import random_channel


class TestNoiseCovariance:
    def test_structure(self):
        cov = noise_covariance(3, 4)
        np.testing.assert_array_equal(np.diag(cov.R_z), [4.0, 4.0, 1.0])
        assert cov.determinant == pytest.approx(16.0)

    def test_single_ap(self):
        with pytest.raises(UnsupportedConfigurationError):
            noise_covariance(1, 2)


class TestUserRate:
    """Achievable rate of one user"""

    def test_matches_direct_determinant(self):
        rng = np.random.default_rng(11)
        channel = random_channel(rng, 3)
        P, K = 0.5, 2
        R = np.diag([2.0, 2.0, 1.0])
        direct = np.linalg.det(np.eye(3) + (P / channel.noise_var) * channel.H @ channel.H.T @ np.linalg.inv(R))
        expected = math.log2(direct) / (3 + K - 1)
        assert user_rate(channel, P, 3, K) == pytest.approx(expected, rel=1e-10)

    def test_identity_channel(self):
        channel = ChannelMatrix(0, np.eye(2), 1.0)
        # (1/4) log2((1 + 3/3)(1 + 3))
        assert user_rate(channel, 3.0, 2, 3) == pytest.approx(0.75)

    def test_zero_power_gives_zero_rate(self):
        channel = random_channel(np.random.default_rng(1), 2)
        assert user_rate(channel, 0.0, 2, 3) == pytest.approx(0.0, abs=1e-15)

    def test_monotone_in_power(self):
        channel = random_channel(np.random.default_rng(2), 2)
        assert user_rate(channel, 1e-2, 2, 3) < user_rate(channel, 1e-1, 2, 3)

    def test_singular_channel(self):
        with pytest.raises(DegenerateGeometryError):
            user_rate(ChannelMatrix(4, np.ones((2, 2)), 1.0), 1.0, 2, 2)

    def test_negative_power(self):
        with pytest.raises(InvalidParameterError):
            user_rate(random_channel(np.random.default_rng(0), 2), -1.0, 2, 2)


class TestLinkRates:
    """Per-link rates used by the allocator"""

    def test_best_mode_per_ap(self):
        channel = ChannelMatrix(0, np.array([[0.2, 0.0], [0.1, 0.3]]), 1e-2)
        P, K = 1.0, 2
        expected = [math.log2(1 + P * g ** 2 / (K * 1e-2)) / (2 + K - 1) for g in (0.2, 0.3)]
        np.testing.assert_allclose(link_rates(channel, P, K), expected, rtol=1e-12)

    def test_unreachable_ap_has_zero_rate(self):
        channel = ChannelMatrix(0, np.array([[0.2, 0.0], [0.1, 0.0]]), 1e-2)
        assert link_rates(channel, 1.0, 2)[1] == 0.0

    def test_per_link_rate_index(self):
        channel = random_channel(np.random.default_rng(5), 3)
        assert per_link_rate(channel, 1.0, 2, 3, 2) == pytest.approx(link_rates(channel, 1.0, 2)[2])
        with pytest.raises(IndexError):
            per_link_rate(channel, 1.0, 3, 3, 2)

    def test_rate_matrix_shape(self):
        rng = np.random.default_rng(9)
        channels = [random_channel(rng, 2, k) for k in range(3)]
        rates = rate_matrix(channels, 0.1)
        assert rates.shape == (3, 2)
        assert np.all(rates > 0)

    def test_rate_matrix_needs_users(self):
        with pytest.raises(InvalidParameterError):
            rate_matrix([], 1.0)
