"""Shared multiple-access channel: superposition, power control and fading.

With perfect channel knowledge the transmit power inverts the channel
coefficient exactly, so slot aggregates are the clean symbol superposition
plus circularly-symmetric complex noise of total variance ``sigma_z2``.
Without channel knowledge every (node, slot) pair draws an independent
coefficient whose magnitude is normal around one and whose phase is uniform
in ``[-phi, phi]``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .codesign.types import Design
from .functions import tuple_digits

CSI_MODES = ("perfect", "none")


@dataclass(frozen=True)
class ChannelModel:
    """Noise and fading parameters of the link."""

    sigma_z2: float
    csi: str = "perfect"
    sigma_h2: float = 0.0
    phi: float = 0.0
    fading_draw: str = "per_node_per_slot"

    def __post_init__(self):
        if self.sigma_z2 < 0:
            raise ValueError("sigma_z2 must be nonnegative")
        if self.csi not in CSI_MODES:
            raise ValueError(f"csi must be one of {CSI_MODES}")
        if self.sigma_h2 < 0:
            raise ValueError("sigma_h2 must be nonnegative")
        if not 0 <= self.phi <= math.pi:
            raise ValueError("phi must lie in [0, pi]")
        if self.fading_draw != "per_node_per_slot":
            raise ValueError("only per_node_per_slot fading is supported")


def fading_coefficients(K, L, model: ChannelModel, rng):
    """Per-(node, slot) complex coefficients; magnitudes clamped at 1e-6."""
    mag = rng.normal(1.0, math.sqrt(model.sigma_h2), size=(K, L))
    mag = np.clip(mag, 1e-6, None)
    phase = rng.uniform(-model.phi, model.phi, size=(K, L))
    return mag * np.exp(1j * phase)


def complex_noise(L, sigma_z2, rng):
    """Circular complex Gaussian of total per-slot variance sigma_z2."""
    if sigma_z2 == 0:
        return np.zeros(L, dtype=np.complex128)
    scale = math.sqrt(sigma_z2 / 2.0)
    return scale * (rng.normal(size=L) + 1j * rng.normal(size=L))


def transmit(design: Design, tuple_index, model: ChannelModel, rng
             ) -> np.ndarray:
    """Received slot sequence for one joint input tuple.

    The generator is split into a fading stream and a noise stream so the
    zero-fading model reproduces the perfect-CSI samples bit for bit.
    """
    fade_rng, noise_rng = rng.spawn(2)
    digits = tuple_digits(tuple_index, design.K, design.Q)
    pos = design.positions(digits)
    symbols = design.x[pos]                    # (K,)
    gates = design.C[pos, :].astype(np.float64)  # (K, L)
    sent = symbols[:, None] * gates
    if model.csi == "none":
        h = fading_coefficients(design.K, design.L, model, fade_rng)
        sent = h * sent
    y = sent.sum(axis=0)
    return y + complex_noise(design.L, model.sigma_z2, noise_rng)


def snr_db(design: Design, sigma_z2) -> float:
    """Transmit signal-to-noise ratio in decibels, ``10 log10(||x||^2 / s2)``."""
    if sigma_z2 < 0:
        raise ValueError("sigma_z2 must be nonnegative")
    if sigma_z2 == 0:
        return math.inf
    return 10.0 * math.log10(design.power() / sigma_z2)


def sigma_for_snr_db(design: Design, snr) -> float:
    """Noise variance that realizes a requested SNR for this design."""
    return design.power() / (10.0 ** (snr / 10.0))
