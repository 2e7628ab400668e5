"""Comparison schemes: repeated single-slot decoding, PAM aggregation and
bit slicing."""

import math

import numpy as np
import pytest

from repcomp.baselines import (BaselineConfig, aircomp_estimate,
                               bitslice_estimate, channelcomp_repeat_estimate)
from repcomp.channel import ChannelModel
from repcomp.codesign import Design
from repcomp.decoder import build_codebook
from repcomp.errors import ConfigurationError
from repcomp.functions import build_function_table, digits_to_index

NOISELESS = ChannelModel(sigma_z2=0.0)


def pam_sum_design():
    """Valid single-slot design for the sum: an amplitude ramp."""
    ramp = np.arange(1.0, 5.0)
    x = (ramp / np.linalg.norm(ramp)).astype(complex)
    return Design(x=x, C=np.ones((4, 1), dtype=np.int8), L=1, K=4, Q=4,
                  values=np.arange(1.0, 5.0), kind="sum")


class TestBaselineConfig:
    def test_unknown_scheme(self):
        with pytest.raises(ConfigurationError):
            BaselineConfig(scheme="telepathy")

    def test_valid(self):
        cfg = BaselineConfig(scheme="bit_slicing", L=2, bits_per_slice=1)
        assert cfg.L == 2


class TestChannelCompRepeat:
    def test_noiseless_mean_is_exact(self):
        design = pam_sum_design()
        table = build_function_table("sum", 4, 4)
        cb = build_codebook(design, table)
        g = digits_to_index([0, 1, 2, 3], 4)
        rng = np.random.default_rng(0)
        est = channelcomp_repeat_estimate(design, cb, table, g, 3,
                                          NOISELESS, rng)
        assert est == table.outputs[g]

    def test_single_repeat_equals_plain_decode(self):
        design = pam_sum_design()
        table = build_function_table("sum", 4, 4)
        cb = build_codebook(design, table)
        g = digits_to_index([3, 3, 0, 1], 4)
        est = channelcomp_repeat_estimate(design, cb, table, g, 1, NOISELESS,
                                          np.random.default_rng(1))
        assert est == table.outputs[g]

    def test_requires_single_slot_design(self):
        design = pam_sum_design()
        two = Design(x=design.x, C=np.ones((4, 2), dtype=np.int8), L=2,
                     K=4, Q=4, values=design.values, kind="sum")
        table = build_function_table("sum", 4, 4)
        cb = build_codebook(design, table)
        with pytest.raises(ConfigurationError):
            channelcomp_repeat_estimate(two, cb, table, 0, 2, NOISELESS,
                                        np.random.default_rng(0))

    def test_averaging_reduces_error(self):
        """More repeats give a no-worse mean squared error (sum, 20 dB)."""
        design = pam_sum_design()
        table = build_function_table("sum", 4, 4)
        cb = build_codebook(design, table)
        model = ChannelModel(sigma_z2=0.01)
        rng = np.random.default_rng(42)
        errors = {1: [], 2: []}
        for t in range(4000):
            g = int(np.random.default_rng([5, t]).integers(table.size))
            f = table.outputs[g]
            for L in (1, 2):
                est = channelcomp_repeat_estimate(
                    design, cb, table, g, L, model,
                    np.random.default_rng([7, L, t]))
                errors[L].append((f - est) ** 2 / f ** 2)
        assert np.mean(errors[2]) <= np.mean(errors[1]) * 1.10


class TestAircomp:
    def test_sum_noiseless_exact(self):
        table = build_function_table("sum", 4, 4)
        g = digits_to_index([0, 1, 2, 3], 4)   # values 1+2+3+4 = 10
        est = aircomp_estimate(table, g, 2, NOISELESS, 10.0,
                               np.random.default_rng(0))
        assert est == pytest.approx(10.0, abs=1e-9)

    def test_product_noiseless_exact(self):
        table = build_function_table("product", 2, 4, values=[1, 2, 3, 4])
        g = digits_to_index([1, 2], 4)         # values (2, 3)
        est = aircomp_estimate(table, g, 1, NOISELESS, 10.0,
                               np.random.default_rng(0))
        assert est == pytest.approx(6.0, abs=1e-9)

    def test_max_log_sum_exp(self):
        table = build_function_table("max", 2, 4)
        g = digits_to_index([0, 3], 4)          # values (1, 4)
        est = aircomp_estimate(table, g, 1, NOISELESS, 10.0,
                               np.random.default_rng(0))
        expected = math.log(math.exp(10.0) + math.exp(40.0)) / 10.0
        assert est == pytest.approx(min(expected, 4.0), abs=1e-9)
        assert abs(est - 4.0) <= 0.01

    def test_max_error_bounded_by_log_k_over_alpha(self):
        alpha = 7.0
        for K in (2, 3, 4):
            table = build_function_table("max", K, 4)
            for g in range(table.size):
                est = aircomp_estimate(table, g, 1, NOISELESS, alpha,
                                       np.random.default_rng(0))
                assert abs(est - table.outputs[g]) <= math.log(K) / alpha + 1e-9

    def test_output_clamped_to_range(self):
        table = build_function_table("sum", 2, 2)
        model = ChannelModel(sigma_z2=100.0)
        for t in range(50):
            est = aircomp_estimate(table, 0, 1, model,
                                   10.0, np.random.default_rng([3, t]))
            assert 2.0 <= est <= 4.0

    def test_unsupported_kind(self):
        table = build_function_table("custom", 2, 2, evaluator=lambda v: 1.0)
        with pytest.raises(ConfigurationError):
            aircomp_estimate(table, 0, 1, NOISELESS, 10.0,
                             np.random.default_rng(0))


class TestBitSlicing:
    def test_hand_example(self):
        # values {1,2,3,4}, offset 1, codes 0..3 (2 bits); inputs (3, 1) have
        # codes (2, 0): MSB slot sums 1, LSB slot sums 0 -> 2 + 2*offset = 4
        table = build_function_table("sum", 2, 4)
        g = digits_to_index([2, 0], 4)
        est = bitslice_estimate(table, g, 2, NOISELESS,
                                np.random.default_rng(0))
        assert est == 4.0 == table.outputs[g]

    def test_noiseless_exact_full_sweep(self):
        for K, Q, L in [(2, 4, 2), (3, 4, 1), (2, 8, 3), (4, 4, 2)]:
            table = build_function_table("sum", K, Q)
            for g in range(table.size):
                est = bitslice_estimate(table, g, L, NOISELESS,
                                        np.random.default_rng(0))
                assert est == table.outputs[g], (K, Q, L, g)

    def test_rounding_margin(self):
        """Noise below half a PAM step leaves the estimate exact."""
        table = build_function_table("sum", 2, 4)
        levels = np.arange(2.0)
        amp = 1.0 / (math.sqrt(2) * np.linalg.norm(levels))
        model = ChannelModel(sigma_z2=(0.3 * amp) ** 2)
        g = digits_to_index([2, 1], 4)
        exact = 0
        for t in range(200):
            est = bitslice_estimate(table, g, 2, model,
                                    np.random.default_rng([11, t]))
            exact += est == table.outputs[g]
        assert exact >= 190   # |noise| < 0.5*amp rounds away almost surely

    def test_non_sum_rejected(self):
        table = build_function_table("product", 2, 4)
        with pytest.raises(ConfigurationError):
            bitslice_estimate(table, 0, 2, NOISELESS,
                              np.random.default_rng(0))

    def test_non_power_of_two_rejected(self):
        table = build_function_table("sum", 2, 3)
        with pytest.raises(ConfigurationError):
            bitslice_estimate(table, 0, 1, NOISELESS,
                              np.random.default_rng(0))

    def test_bad_slice_count_rejected(self):
        table = build_function_table("sum", 2, 4)
        with pytest.raises(ConfigurationError):
            bitslice_estimate(table, 0, 4, NOISELESS,
                              np.random.default_rng(0))
