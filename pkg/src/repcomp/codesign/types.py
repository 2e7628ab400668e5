"""Core value types produced and consumed by the joint design solver."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class SolveParams:
    """Knobs of the alternating design solve.

    ``T`` caps the number of alternations and ``delta_stop`` is the Frobenius
    threshold on successive coding-matrix iterates that ends the loop early.
    """

    T: int = 30
    delta_stop: float = 1e-4
    eps_sdp: float = 1e-7
    delta_bb: float = 1e-6
    seed: int = 0
    init: str = "ones"
    sdp_max_sweeps: int = 5000
    sdp_stall_window: int = 400
    bb_node_cap: int = 200_000

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        for name in ("delta_stop", "eps_sdp", "delta_bb"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.init not in ("ones", "random"):
            raise ValueError(f"init must be 'ones' or 'random', got {self.init!r}")


@dataclass(frozen=True)
class LiftedMatrix:
    """Hermitian PSD matrix with trace at most one (the lifted modulation)."""

    W: np.ndarray

    @property
    def n(self):
        return self.W.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.W)


@dataclass
class Design:
    """A modulation vector together with its repetition-coding matrix.

    ``x`` has length ``Q*K`` in general; a length-``Q`` vector means all
    nodes share one constellation (and one coding block).  ``meta`` carries
    the solver trace for diagnostics and reproducibility.
    """

    x: np.ndarray
    C: np.ndarray
    L: int
    K: int
    Q: int
    values: np.ndarray
    kind: str
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.complex128)
        self.C = np.asarray(self.C, dtype=np.int8)
        if self.C.shape != (len(self.x), self.L):
            raise ValueError(
                f"C must have shape ({len(self.x)}, {self.L}), got {self.C.shape}")
        if not np.isin(self.C, (0, 1)).all():
            raise ValueError("C entries must be 0 or 1")
        if len(self.x) not in (self.Q, self.Q * self.K):
            raise ValueError(
                f"x must have length Q={self.Q} (shared) or Q*K={self.Q * self.K}")
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def n(self):
        return len(self.x)

    @property
    def shared(self):
        """True when all nodes use one shared constellation block."""
        return self.n == self.Q

    def power(self):
        return float(np.vdot(self.x, self.x).real)

    def positions(self, digits):
        """Indices into ``x``/``C`` rows for the given per-node value indices."""
        digits = np.asarray(digits)
        if self.shared:
            return digits
        return np.arange(self.K) * self.Q + digits
