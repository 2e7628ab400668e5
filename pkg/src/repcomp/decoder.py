"""Receiver side: codebook construction and nearest-sequence decoding.

The codebook tabulates every achievable noiseless slot sequence.  Sequences
reached by tuples with different outputs cannot be told apart, so their
cells are merged and answer with the arithmetic mean of the distinct
outputs involved.  Decoding picks the nearest codebook sequence in squared
Euclidean distance over all slots jointly.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .codesign.types import Design
from .errors import CapacityError, RepcompError
from .functions import FunctionTable, all_digits

GROUP_TOL = 1e-9


@dataclass(frozen=True)
class CodebookPoint:
    v: np.ndarray
    output_value: float
    merged_from: Tuple[float, ...]

    @property
    def merged(self):
        return len(self.merged_from) > 1


@dataclass(frozen=True)
class Codebook:
    """Noiseless sequence table with merged ambiguous cells."""

    points: List[CodebookPoint]
    vmatrix: np.ndarray       # (P, L) complex, row per point
    outputs: np.ndarray       # (P,) decoded value per point
    tuple_map: np.ndarray     # (Q**K,) point index per tuple

    def __len__(self):
        return len(self.points)

    @property
    def merged_count(self):
        return sum(1 for p in self.points if p.merged)


def _sequence_groups(V, tol):
    decimals = int(-np.log10(tol) + 0.5)
    keys = np.round(V, decimals) + (0.0 + 0.0j)
    flat = keys.view(np.float64).reshape(len(keys), -1)
    _, first, inverse = np.unique(flat, axis=0, return_index=True,
                                  return_inverse=True)
    # renumber groups by first appearance so point order is tuple order
    order = np.argsort(first, kind="stable")
    renumber = np.empty_like(order)
    renumber[order] = np.arange(len(order))
    return renumber[inverse]


def build_codebook(design: Design, table: FunctionTable,
                   budget=65536, tol=GROUP_TOL) -> Codebook:
    """Enumerate all noiseless sequences and merge indistinguishable cells."""
    if table.size > budget:
        raise CapacityError(
            f"Q**K = {table.size} exceeds the codebook budget {budget}")
    digits = all_digits(table.K, table.Q).astype(np.int64)
    if design.shared:
        pos = digits
    else:
        pos = digits + (np.arange(table.K) * table.Q)[None, :]
    symbols = design.x[pos]                            # (S, K)
    gates = design.C[pos.reshape(-1), :].reshape(
        table.size, table.K, design.L).astype(np.float64)
    V = (symbols[:, :, None] * gates).sum(axis=1)      # (S, L)

    group = _sequence_groups(V, tol)
    n_groups = int(group.max()) + 1 if len(group) else 0
    points = []
    vmatrix = np.empty((n_groups, design.L), dtype=np.complex128)
    outputs = np.empty(n_groups)
    for g in range(n_groups):
        members = np.flatnonzero(group == g)
        distinct = np.unique(table.outputs[members])
        value = float(distinct.mean()) if len(distinct) > 1 \
            else float(distinct[0])
        v = V[members[0]].copy()
        points.append(CodebookPoint(v=v, output_value=value,
                                    merged_from=tuple(float(o)
                                                      for o in distinct)))
        vmatrix[g] = v
        outputs[g] = value
    return Codebook(points=points, vmatrix=vmatrix, outputs=outputs,
                    tuple_map=group.astype(np.int64))


def decode(codebook: Codebook, y) -> float:
    """Output value of the nearest sequence; ties go to the lowest index."""
    if len(codebook) == 0:
        raise RepcompError("cannot decode with an empty codebook")
    y = np.asarray(y, dtype=np.complex128)
    dist = (np.abs(codebook.vmatrix - y[None, :]) ** 2).sum(axis=1)
    return float(codebook.outputs[int(np.argmin(dist))])


def decode_batch(codebook: Codebook, Y) -> np.ndarray:
    """Vectorized :func:`decode` over rows of ``Y`` (shape (T, L))."""
    if len(codebook) == 0:
        raise RepcompError("cannot decode with an empty codebook")
    Y = np.asarray(Y, dtype=np.complex128)
    out = np.empty(len(Y))
    block = max(1, int(4_000_000 // max(len(codebook), 1)))
    for start in range(0, len(Y), block):
        chunk = Y[start:start + block]
        dist = (np.abs(chunk[:, None, :] - codebook.vmatrix[None, :, :]) ** 2
                ).sum(axis=2)
        out[start:start + block] = codebook.outputs[np.argmin(dist, axis=1)]
    return out
