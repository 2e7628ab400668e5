"""Deterministic closed-form designs for alphabets too large to optimize.

For the sum of node values, an amplitude ramp is computable in one slot
(distinct totals give distinct aggregates), and splitting the alphabet into
contiguous bands, one band per slot, remains computable for any slot count:
the per-slot partial totals determine each other and the full total.  The
pairwise-constraint count explodes combinatorially with the alphabet size,
so these constructions stand in for the optimizer on large-Q sum designs.
"""

import numpy as np

from ..errors import ConfigurationError
from ..functions import FunctionTable
from .types import Design


def amplitude_split_design(table: FunctionTable, L) -> Design:
    """Shared-constellation amplitude ramp with the alphabet banded over L slots.

    Value q maps to a real amplitude proportional to q; the coding matrix
    assigns each contiguous band of ``ceil(Q/L)`` values to one slot.  The
    constellation is normalized to unit power.
    """
    if table.kind != "sum":
        raise ConfigurationError(
            f"amplitude-split designs support kind='sum', got {table.kind!r}")
    Q = table.Q
    if not 1 <= L <= Q:
        raise ConfigurationError(f"L must be in [1, {Q}] for Q={Q}")
    ramp = np.arange(1, Q + 1, dtype=np.float64)
    x = (ramp / np.linalg.norm(ramp)).astype(np.complex128)
    C = np.zeros((Q, L), dtype=np.int8)
    band = -(-Q // L)   # ceil
    for q in range(Q):
        C[q, min(q // band, L - 1)] = 1
    return Design(x=x, C=C, L=L, K=table.K, Q=Q, values=table.values,
                  kind=table.kind, seed=None,
                  meta={"projection": "amplitude-split", "iterations": 0})
