"""
Test cases for BIA supersymbol construction and decoding
"""

import numpy as np
import pytest

from owc_alloc.bia.supersymbol import (
    MAX_PLAN_SLOTS,
    build_supersymbol,
    check_plan,
    plan_to_text,
    sum_dof,
    supersymbol_length,
    verify_decoding,
)
from owc_alloc.channel.model import ChannelMatrix
from owc_alloc.utils.errors import (
    DecodeFailureError,
    InvalidParameterError,
    ProblemTooLargeError,
    UnsupportedConfigurationError,
)
from tests.test_utils import random_channel


class TestSupersymbolLength:
    """Slot counts and degrees of freedom"""

    @pytest.mark.parametrize("L", [2, 3, 4])
    @pytest.mark.parametrize("K", [1, 2, 3])
    def test_plan_length_matches_formula(self, L, K):
        plan = build_supersymbol(L, K)
        assert plan.length == (L - 1) ** K + K * (L - 1) ** (K - 1)
        assert plan.block1_len == (L - 1) ** K
        assert plan.block2_len == K * (L - 1) ** (K - 1)

    def test_two_aps_three_users(self):
        assert supersymbol_length(2, 3) == 4

    def test_sum_dof(self):
        assert sum_dof(2, 3) == pytest.approx(1.5)
        assert sum_dof(4, 1) == pytest.approx(1.0)

    def test_single_ap_unsupported(self):
        with pytest.raises(UnsupportedConfigurationError):
            supersymbol_length(1, 3)

    def test_no_users(self):
        with pytest.raises(InvalidParameterError):
            build_supersymbol(2, 0)

    def test_size_limit(self):
        with pytest.raises(ProblemTooLargeError):
            build_supersymbol(16, 10)
        assert supersymbol_length(16, 10) > MAX_PLAN_SLOTS


class TestPlanStructure:
    """Schedule and beamforming matrices"""

    @pytest.mark.parametrize("L,K", [(2, 1), (2, 3), (3, 2), (3, 3), (4, 2)])
    def test_plan_is_valid(self, L, K):
        assert check_plan(build_supersymbol(L, K)) == []

    def test_precoder_shape_and_entries(self):
        plan = build_supersymbol(3, 2)
        precoder = plan.precoder(0)
        assert precoder.shape == (plan.length * 3, plan.blocks_per_user * 3)
        assert set(np.unique(precoder)) <= {0, 1}
        # every alignment block occupies L slots, one identity each
        assert precoder.sum() == plan.blocks_per_user * 3 * 3

    def test_precoder_user_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            build_supersymbol(2, 2).precoder(2)

    def test_block2_serves_one_stream(self):
        plan = build_supersymbol(3, 3)
        for n in range(plan.block1_len, plan.length):
            assert plan.activation[:, n, :].sum() == 1

    def test_schedule_and_text_export(self):
        plan = build_supersymbol(2, 3)
        schedule = plan.schedule
        assert len(schedule) == 4
        assert all(len(row) == 3 for row in schedule)
        text = plan_to_text(plan)
        assert text.startswith("# supersymbol L=2 K=3 length=4")
        assert text.count("block2") == 3 + 1

    def test_corrupted_plan_is_reported(self):
        plan = build_supersymbol(2, 2)
        plan.activation[0, plan.block1_len + 1, 0] = 1
        assert check_plan(plan)


class TestDecoding:
    """Interference cancellation by simulated transmission"""

    @pytest.mark.parametrize("L,K", [(2, 3), (3, 2)])
    def test_noiseless_decoding_is_exact(self, L, K):
        rng = np.random.default_rng(7)
        plan = build_supersymbol(L, K)
        for _ in range(100):
            channels = [random_channel(rng, L, k) for k in range(K)]
            symbols = [rng.standard_normal((plan.blocks_per_user, L)) for _ in range(K)]
            assert verify_decoding(plan, channels, symbols).residual <= 1e-9

    def test_noise_leaves_bounded_error(self):
        rng = np.random.default_rng(3)
        plan = build_supersymbol(3, 2)
        channels = [random_channel(rng, 3, k) for k in range(2)]
        symbols = [rng.standard_normal((plan.blocks_per_user, 3)) for _ in range(2)]
        result = verify_decoding(plan, channels, symbols, noise_std=1e-6, rng=rng)
        assert 0 < result.residual < 1e-3

    def test_singular_channel(self):
        plan = build_supersymbol(2, 2)
        singular = ChannelMatrix(0, np.ones((2, 2)), 1.0)
        symbols = [np.zeros((1, 2)), np.zeros((1, 2))]
        with pytest.raises(DecodeFailureError):
            verify_decoding(plan, [singular, singular], symbols)

    def test_channel_count_mismatch(self):
        plan = build_supersymbol(2, 2)
        with pytest.raises(InvalidParameterError):
            verify_decoding(plan, [np.eye(2)], [np.zeros((1, 2))])
