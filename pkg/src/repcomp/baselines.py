"""Comparison schemes: single-slot repetition, analog-style PAM aggregation
and bit-slicing.

Every baseline rescales its per-slot constellation so the total transmit
energy over the L slots matches the unit budget of the designed schemes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, complex_noise, fading_coefficients
from .codesign.types import Design
from .decoder import Codebook, decode
from .errors import ConfigurationError
from .functions import FunctionTable, tuple_digits

BASELINE_SCHEMES = ("channelcomp_repeat", "digital_aircomp", "bit_slicing")


@dataclass(frozen=True)
class BaselineConfig:
    """Parameters of one comparison scheme."""

    scheme: str
    L: int = 1
    alpha: float = 10.0          # max-approximation sharpness (PAM scheme)
    bits_per_slice: int = 1      # bit_slicing only

    def __post_init__(self):
        if self.scheme not in BASELINE_SCHEMES:
            raise ConfigurationError(f"unknown baseline scheme {self.scheme!r}")
        if self.L < 1:
            raise ConfigurationError("L must be >= 1")
        if self.alpha <= 0:
            raise ConfigurationError("alpha must be positive")


def _superimpose(amplitudes, L, model, rng):
    """Received slots when every node sends ``amplitudes[k]`` in each slot."""
    fade_rng, noise_rng = rng.spawn(2)
    K = len(amplitudes)
    sent = np.tile(np.asarray(amplitudes, dtype=np.complex128)[:, None],
                   (1, L))
    if model.csi == "none":
        sent = fading_coefficients(K, L, model, fade_rng) * sent
    return sent.sum(axis=0) + complex_noise(L, model.sigma_z2, noise_rng)


def channelcomp_repeat_estimate(design_l1: Design, codebook_l1: Codebook,
                                table: FunctionTable, tuple_index, L,
                                model: ChannelModel, rng) -> float:
    """Repeat a single-slot design L times and average the decoded outputs.

    The repeated symbols are scaled by ``1/sqrt(L)`` to keep the total
    energy at the single-shot budget; decoding rescales accordingly.
    """
    if design_l1.L != 1:
        raise ConfigurationError("channelcomp_repeat needs an L=1 design")
    scale = 1.0 / math.sqrt(L)
    digits = tuple_digits(tuple_index, design_l1.K, design_l1.Q)
    pos = design_l1.positions(digits)
    amplitudes = design_l1.x[pos] * design_l1.C[pos, 0] * scale
    y = _superimpose(amplitudes, L, model, rng)
    outs = [decode(codebook_l1, np.array([y_r / scale])) for y_r in y]
    return float(np.mean(outs))


def _aircomp_maps(kind, alpha):
    if kind == "sum":
        return (lambda v: v), (lambda t: t)
    if kind == "product":
        return np.log, np.exp
    if kind == "max":
        return (lambda v: np.exp(alpha * v)), \
               (lambda t: np.log(max(t, 1e-300)) / alpha)
    raise ConfigurationError(
        f"PAM aggregation supports sum/product/max, got {kind!r}")


def aircomp_estimate(table: FunctionTable, tuple_index, L,
                     model: ChannelModel, alpha, rng) -> float:
    """Analog-style estimate: PAM-modulate a pre-image of each value, average
    the L slot observations and invert the map, clamped to the output range.

    Products ride on logarithms; the maximum uses a log-sum-exp surrogate
    whose noiseless error is at most ``log(K)/alpha``.
    """
    pre, post = _aircomp_maps(table.kind, alpha)
    levels = pre(table.values.astype(np.float64))
    amp = 1.0 / (math.sqrt(L) * np.linalg.norm(levels))
    digits = tuple_digits(tuple_index, table.K, table.Q)
    y = _superimpose(amp * levels[digits], L, model, rng)
    estimate = float(np.mean(y).real) / amp
    out = post(estimate)
    lo, hi = table.distinct_outputs[0], table.distinct_outputs[-1]
    return float(min(max(out, lo), hi))


def bitslice_estimate(table: FunctionTable, tuple_index, L,
                      model: ChannelModel, rng) -> float:
    """Split each value code into L bit segments, superimpose them slot by
    slot as PAM and reassemble the rounded slot sums."""
    if table.kind != "sum":
        raise ConfigurationError("bit slicing supports the sum only")
    Q, K = table.Q, table.K
    bits = Q.bit_length() - 1
    if 2**bits != Q:
        raise ConfigurationError(
            f"bit slicing needs a power-of-two alphabet, got Q={Q}")
    if bits % L != 0:
        raise ConfigurationError(
            f"L={L} must divide log2(Q)={bits} into whole slices")
    offset = float(table.values[0])
    if not np.allclose(table.values, offset + np.arange(Q)):
        raise ConfigurationError(
            "bit slicing needs consecutive integer values")
    per_slice = bits // L
    top = 2**per_slice - 1

    codes = tuple_digits(tuple_index, K, Q)
    shifts = bits - per_slice * (np.arange(L) + 1)
    segments = (codes[:, None] >> shifts[None, :]) & top      # (K, L)

    levels = np.arange(2**per_slice, dtype=np.float64)
    amp = 1.0 / (math.sqrt(L) * np.linalg.norm(levels))

    fade_rng, noise_rng = rng.spawn(2)
    sent = amp * segments.astype(np.complex128)
    if model.csi == "none":
        sent = fading_coefficients(K, L, model, fade_rng) * sent
    y = sent.sum(axis=0) + complex_noise(L, model.sigma_z2, noise_rng)

    slot_sums = np.rint(y.real / amp)
    slot_sums = np.clip(slot_sums, 0, K * top)
    total_code = float((slot_sums * (2.0 ** shifts)).sum())
    return total_code + K * offset
