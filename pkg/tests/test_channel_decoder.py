"""Channel simulation, codebook construction and decoding."""

import math

import numpy as np
import pytest

from repcomp.channel import (ChannelModel, sigma_for_snr_db, snr_db, transmit)
from repcomp.codesign import Design
from repcomp.decoder import build_codebook, decode, decode_batch
from repcomp.errors import RepcompError
from repcomp.functions import build_function_table, digits_to_index
from repcomp.oracle import overlap_check


def qpsk_two_slot():
    """Hand-built two-slot product design: values {1,3} on slot one,
    {2,4} on slot two."""
    x = np.array([1.0, -1.0, 1j, -1j])
    C = np.array([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=np.int8)
    return Design(x=x, C=C, L=2, K=4, Q=4,
                  values=np.arange(1.0, 5.0), kind="product")


def qpsk_single_slot():
    x = np.array([1.0, -1.0, 1j, -1j])
    return Design(x=x, C=np.ones((4, 1), dtype=np.int8), L=1, K=4, Q=4,
                  values=np.arange(1.0, 5.0), kind="product")


class TestTransmit:
    def test_noiseless_hand_superposition(self):
        design = qpsk_two_slot()
        rng = np.random.default_rng(0)
        model = ChannelModel(sigma_z2=0.0)
        g = digits_to_index([0, 1, 2, 3], 4)   # values (1, 2, 3, 4)
        y = transmit(design, g, model, rng)
        assert np.allclose(y, [1 + 1j, -1 - 1j], atol=1e-12)
        g = digits_to_index([0, 0, 1, 1], 4)   # values (1, 1, 2, 2)
        y = transmit(design, g, model, rng)
        assert np.allclose(y, [2, -2], atol=1e-12)

    def test_noise_is_zero_mean(self):
        design = qpsk_two_slot()
        model = ChannelModel(sigma_z2=0.5)
        g = digits_to_index([0, 1, 2, 3], 4)
        rng = np.random.default_rng(7)
        samples = np.array([transmit(design, g, model, r)
                            for r in rng.spawn(10_000)])
        clean = np.array([1 + 1j, -1 - 1j])
        sem = math.sqrt(0.5 / 10_000)
        assert np.all(np.abs(samples.mean(axis=0) - clean) < 4 * sem * 2)

    def test_noise_component_variance(self):
        design = qpsk_single_slot()
        model = ChannelModel(sigma_z2=0.8)
        g = 0
        rng = np.random.default_rng(11)
        ys = np.array([transmit(design, g, model, r)[0]
                       for r in rng.spawn(100_000)])
        clean = ys.mean()
        assert abs(np.var(ys.real) - 0.4) < 0.4 * 0.02
        assert abs(np.var(ys.imag) - 0.4) < 0.4 * 0.02

    def test_zero_fading_matches_perfect_csi_bitwise(self):
        design = qpsk_two_slot()
        g = digits_to_index([3, 2, 1, 0], 4)
        perfect = ChannelModel(sigma_z2=0.3, csi="perfect")
        faded = ChannelModel(sigma_z2=0.3, csi="none", sigma_h2=0.0, phi=0.0)
        y1 = transmit(design, g, perfect, np.random.default_rng(5))
        y2 = transmit(design, g, faded, np.random.default_rng(5))
        assert np.array_equal(y1, y2)

    def test_fading_magnitude_clamped(self):
        design = qpsk_single_slot()
        model = ChannelModel(sigma_z2=0.0, csi="none", sigma_h2=25.0,
                             phi=math.pi)
        rng = np.random.default_rng(0)
        for r in rng.spawn(50):
            y = transmit(design, 0, model, r)
            assert np.all(np.isfinite(y))

    def test_model_validation(self):
        with pytest.raises(ValueError):
            ChannelModel(sigma_z2=-1.0)
        with pytest.raises(ValueError):
            ChannelModel(sigma_z2=0.0, csi="sometimes")
        with pytest.raises(ValueError):
            ChannelModel(sigma_z2=0.0, phi=4.0)


class TestSnr:
    def test_reference_points(self):
        d = qpsk_single_slot()
        d_unit = Design(x=d.x / 2.0, C=d.C, L=1, K=4, Q=4, values=d.values,
                        kind="product")
        assert snr_db(d_unit, 0.1) == pytest.approx(10.0)
        assert snr_db(d_unit, 0.01) == pytest.approx(20.0)
        half = Design(x=d.x / np.sqrt(8), C=d.C, L=1, K=4, Q=4,
                      values=d.values, kind="product")
        assert snr_db(half, 0.5) == pytest.approx(0.0)

    def test_zero_noise_sentinel(self):
        assert snr_db(qpsk_single_slot(), 0.0) == math.inf

    def test_sigma_for_snr_roundtrip(self):
        d = qpsk_two_slot()
        sigma = sigma_for_snr_db(d, 17.0)
        assert snr_db(d, sigma) == pytest.approx(17.0)


class TestCodebook:
    def test_two_slot_product_exact(self):
        design = qpsk_two_slot()
        table = build_function_table("product", 4, 4)
        cb = build_codebook(design, table)
        assert cb.merged_count == 0
        by_v = {tuple(np.round(p.v, 9)): p.output_value for p in cb.points}
        assert by_v[(2 + 0j, -2 + 0j)] == 4.0
        assert by_v[(1 + 1j, -1 - 1j)] == 24.0

    def test_single_slot_merged_mean(self):
        design = qpsk_single_slot()
        table = build_function_table("product", 4, 4)
        cb = build_codebook(design, table)
        assert cb.merged_count > 0
        zero_pt = next(p for p in cb.points
                       if np.allclose(p.v, [0.0], atol=1e-12))
        assert zero_pt.merged
        assert {4.0, 24.0} <= set(zero_pt.merged_from)
        # mean over the distinct colliding outputs, computed independently
        from repcomp.functions import all_digits
        sums = design.x[all_digits(4, 4).astype(int)].sum(axis=1)
        zero_tuples = np.flatnonzero(np.abs(sums) < 1e-12)
        outs = sorted(set(float(table.outputs[g]) for g in zero_tuples))
        assert outs == [4.0, 24.0, 144.0]
        assert zero_pt.output_value == pytest.approx(np.mean(outs))
        assert tuple(outs) == zero_pt.merged_from

    def test_constant_function_single_point(self):
        table = build_function_table("custom", 2, 2, evaluator=lambda v: 5.0)
        design = Design(x=np.array([0.3, 0.4j, 0.2, 0.1]),
                        C=np.zeros((4, 2), dtype=np.int8), L=2, K=2, Q=2,
                        values=np.array([1.0, 2.0]), kind="custom")
        cb = build_codebook(design, table)
        assert len(cb) == 1
        assert cb.points[0].output_value == 5.0
        assert np.allclose(cb.points[0].v, 0)

    def test_tuple_map_consistent(self):
        design = qpsk_two_slot()
        table = build_function_table("product", 4, 4)
        cb = build_codebook(design, table)
        for g in (0, 7, 100, 255):
            point = cb.points[cb.tuple_map[g]]
            assert point.output_value == table.outputs[g]


class TestDecode:
    def test_nearest(self):
        design = qpsk_two_slot()
        table = build_function_table("product", 4, 4)
        cb = build_codebook(design, table)
        assert decode(cb, np.array([2.1, -1.9 + 0.05j])) == 4.0

    def test_exact_point(self):
        design = qpsk_two_slot()
        table = build_function_table("product", 4, 4)
        cb = build_codebook(design, table)
        for p in cb.points[:10]:
            assert decode(cb, p.v) == p.output_value

    def test_tie_breaks_to_lowest_index(self):
        table = build_function_table("custom", 1, 2,
                                     evaluator=lambda v: float(v[0]))
        design = Design(x=np.array([1.0 + 0j, -1.0 + 0j]),
                        C=np.ones((2, 1), dtype=np.int8), L=1, K=1, Q=2,
                        values=np.array([1.0, 2.0]), kind="custom")
        cb = build_codebook(design, table)
        assert len(cb) == 2
        # y = 0 is equidistant from +1 and -1
        assert decode(cb, np.array([0.0 + 0j])) == cb.points[0].output_value

    def test_empty_codebook_raises(self):
        from repcomp.decoder import Codebook
        empty = Codebook(points=[], vmatrix=np.zeros((0, 1), complex),
                         outputs=np.zeros(0), tuple_map=np.zeros(0, int))
        with pytest.raises(RepcompError):
            decode(empty, np.array([0.0]))

    def test_batch_matches_scalar(self):
        design = qpsk_two_slot()
        table = build_function_table("product", 4, 4)
        cb = build_codebook(design, table)
        rng = np.random.default_rng(3)
        Y = rng.normal(size=(64, 2)) + 1j * rng.normal(size=(64, 2))
        batch = decode_batch(cb, Y)
        for i in range(64):
            assert batch[i] == decode(cb, Y[i])

    def test_noiseless_roundtrip(self):
        design = qpsk_two_slot()
        table = build_function_table("product", 4, 4)
        assert overlap_check(design, table).exact
        cb = build_codebook(design, table)
        model = ChannelModel(sigma_z2=0.0)
        rng = np.random.default_rng(0)
        for g in range(table.size):
            y = transmit(design, g, model, rng)
            assert decode(cb, y) == table.outputs[g]

    def test_perturbation_stays_in_cell(self):
        design = qpsk_two_slot()
        table = build_function_table("product", 4, 4)
        cb = build_codebook(design, table)
        dists = []
        V = cb.vmatrix
        for i in range(len(V)):
            d = (np.abs(V - V[i]) ** 2).sum(axis=1)
            d[i] = np.inf
            dists.append(d.min())
        min_dist = np.sqrt(min(dists))
        rng = np.random.default_rng(9)
        for p in cb.points[:20]:
            eps = rng.normal(size=2) + 1j * rng.normal(size=2)
            eps *= 0.49 * min_dist / np.linalg.norm(eps)
            assert decode(cb, p.v + eps) == p.output_value
