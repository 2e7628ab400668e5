"""Quantized input domain, function tables and pairwise separation constraints.

A network of ``K`` nodes holds one value each, drawn from a common alphabet of
``Q`` levels.  Every joint input is identified by a tuple index in
``[0, Q**K)`` using base-``Q`` positional encoding with node 1 as the most
significant digit.  The separation constraints pair up tuples whose function
outputs differ and record the difference of their selection vectors together
with a noise-scaled threshold; deduplication keeps, for each distinct
difference vector, the pair with the largest threshold (the binding one).
"""

from collections import namedtuple
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError, ConfigurationError

DEFAULT_ENUMERATION_BUDGET = 65536

FUNCTION_KINDS = ("sum", "product", "max", "custom")

ConstraintEntry = namedtuple("ConstraintEntry", ["d", "delta_f", "witness"])


def tuple_digits(tuple_index, K, Q):
    """Decode a tuple index into per-node value indices (node 1 first)."""
    tuple_index = int(tuple_index)
    if not 0 <= tuple_index < Q**K:
        raise ValueError(
            f"tuple index {tuple_index} out of range for Q={Q}, K={K}")
    digits = np.empty(K, dtype=np.int64)
    for k in range(K - 1, -1, -1):
        digits[k] = tuple_index % Q
        tuple_index //= Q
    return digits


def digits_to_index(digits, Q):
    """Inverse of :func:`tuple_digits`."""
    idx = 0
    for d in digits:
        if not 0 <= d < Q:
            raise ValueError(f"digit {d} out of range for Q={Q}")
        idx = idx * Q + int(d)
    return idx


def all_digits(K, Q):
    """Matrix of shape (Q**K, K) holding every tuple's value indices."""
    size = Q**K
    digits = np.empty((size, K), dtype=np.int16)
    idx = np.arange(size)
    for k in range(K - 1, -1, -1):
        digits[:, k] = idx % Q
        idx = idx // Q
    return digits


def selection_vector(tuple_index, K, Q):
    """Binary support indicator of a tuple over the concatenated alphabet.

    The result has length ``Q*K`` with exactly one set bit inside each node's
    contiguous block of ``Q`` positions.
    """
    digits = tuple_digits(tuple_index, K, Q)
    bits = np.zeros(Q * K, dtype=np.int8)
    bits[np.arange(K) * Q + digits] = 1
    return bits


def count_vector(tuple_index, K, Q):
    """Per-value occupation counts of a tuple (length ``Q``)."""
    digits = tuple_digits(tuple_index, K, Q)
    counts = np.zeros(Q, dtype=np.int16)
    np.add.at(counts, digits, 1)
    return counts


@dataclass(frozen=True)
class FunctionTable:
    """Target function values over the full quantized input lattice.

    ``outputs[g]`` is the function value of tuple index ``g``;
    ``distinct_outputs`` lists the M distinct values in ascending order.
    """

    kind: str
    K: int
    Q: int
    values: np.ndarray
    outputs: np.ndarray
    distinct_outputs: np.ndarray

    @property
    def size(self):
        return self.Q**self.K

    @property
    def M(self):
        return len(self.distinct_outputs)

    def tuple_values(self, tuple_index):
        """Actual input values of a tuple, node 1 first."""
        return self.values[tuple_digits(tuple_index, self.K, self.Q)]


def build_function_table(kind, K, Q, values=None,
                         evaluator: Optional[Callable] = None,
                         budget=DEFAULT_ENUMERATION_BUDGET) -> FunctionTable:
    """Tabulate a function of ``K`` node values over the full input lattice.

    Args:
        kind: one of ``sum``, ``product``, ``max`` or ``custom``.
        K: node count (>= 1).
        Q: quantization level (>= 2).
        values: strictly increasing input alphabet; defaults to ``1..Q``.
        evaluator: required for ``custom``; maps a length-``K`` value vector
            to a scalar output.
        budget: maximum ``Q**K`` that will be enumerated.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if Q < 2:
        raise ValueError(f"Q must be >= 2, got {Q}")
    if kind not in FUNCTION_KINDS:
        raise ConfigurationError(f"unknown function kind {kind!r}")
    if values is None:
        values = np.arange(1, Q + 1, dtype=np.float64)
    else:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (Q,):
            raise ValueError(f"values must have length Q={Q}")
        if not np.all(np.diff(values) > 0):
            raise ValueError("values must be strictly increasing")
    if Q**K > budget:
        raise CapacityError(
            f"Q**K = {Q**K} exceeds the enumeration budget {budget}; "
            "reduce Q or K")

    per_node = values[all_digits(K, Q)]
    if kind == "sum":
        outputs = per_node.sum(axis=1)
    elif kind == "product":
        outputs = per_node.prod(axis=1)
    elif kind == "max":
        outputs = per_node.max(axis=1)
    else:
        if evaluator is None:
            raise ConfigurationError(
                "kind='custom' requires an evaluator callable")
        outputs = np.array([evaluator(row) for row in per_node],
                           dtype=np.float64)

    return FunctionTable(kind=kind, K=K, Q=Q, values=values, outputs=outputs,
                         distinct_outputs=np.unique(outputs))


@dataclass(frozen=True)
class ConstraintSet:
    """Deduplicated pairwise separation constraints.

    Each row of ``d_matrix`` is the difference of the two witnesses' support
    vectors (shared mode: per-value count difference of length ``Q``), and
    ``delta`` holds the matching noise-scaled output gap.  ``witnesses`` are
    tuple indices into the originating table.
    """

    d_matrix: np.ndarray
    delta: np.ndarray
    witnesses: np.ndarray
    sigma_z2: float
    shared_modulation: bool
    kind: str
    K: int
    Q: int
    values: np.ndarray = field(repr=False)

    @property
    def n(self):
        """Dimension of the modulation vector the constraints act on."""
        return self.d_matrix.shape[1]

    def __len__(self):
        return self.d_matrix.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield ConstraintEntry(self.d_matrix[i], float(self.delta[i]),
                                  (int(self.witnesses[i, 0]),
                                   int(self.witnesses[i, 1])))

    def entry(self, i):
        return ConstraintEntry(self.d_matrix[i], float(self.delta[i]),
                               (int(self.witnesses[i, 0]),
                                int(self.witnesses[i, 1])))


def _reduce_by_key(keys, delta, wit_i, wit_j, rank):
    """Per unique key keep the max-delta row (earliest rank on ties);
    order groups by first appearance."""
    order = np.lexsort((rank, -delta, keys))
    keys_s = keys[order]
    boundaries = np.empty(len(keys_s), dtype=bool)
    boundaries[0] = True
    boundaries[1:] = keys_s[1:] != keys_s[:-1]
    heads = order[boundaries]
    starts = np.flatnonzero(boundaries)
    group_first_rank = np.minimum.reduceat(rank[order], starts)
    heads = heads[np.argsort(group_first_rank, kind="stable")]
    return keys[heads], delta[heads], wit_i[heads], wit_j[heads]


def _merge_reduced(chunks):
    keys = np.concatenate([c[0] for c in chunks])
    delta = np.concatenate([c[1] for c in chunks])
    wit_i = np.concatenate([c[2] for c in chunks])
    wit_j = np.concatenate([c[3] for c in chunks])
    rank = np.arange(len(keys), dtype=np.int64)
    return _reduce_by_key(keys, delta, wit_i, wit_j, rank)


def _full_mode_constraints(table, sigma_z2):
    K, Q = table.K, table.Q
    size = table.size
    digits = all_digits(K, Q).astype(np.int64)
    outputs = table.outputs
    base = Q * Q + 1
    weights = base ** np.arange(K, dtype=np.int64)

    chunks = []
    rank_offset = 0
    for i in range(size - 1):
        js = np.arange(i + 1, size)
        gap = np.abs(outputs[i] - outputs[js])
        mask = gap > 0
        if not mask.any():
            rank_offset += len(js)
            continue
        js = js[mask]
        gap = gap[mask]
        di = digits[i]
        dj = digits[js]
        codes = np.where(dj == di[None, :], 0, 1 + di[None, :] * Q + dj)
        keys = codes @ weights
        rank = rank_offset + np.flatnonzero(mask)
        chunk = _reduce_by_key(keys, sigma_z2 * gap,
                               np.full(len(js), i, dtype=np.int64),
                               js.astype(np.int64), rank)
        chunks.append(chunk)
        rank_offset += size - 1 - i
    if not chunks:
        return (np.zeros((0, Q * K), dtype=np.int16),
                np.zeros(0), np.zeros((0, 2), dtype=np.int64))

    keys, delta, wit_i, wit_j = _merge_reduced(chunks)
    # decode keys back into difference vectors
    m = len(keys)
    d_matrix = np.zeros((m, Q * K), dtype=np.int16)
    rows = np.arange(m)
    rest = keys.copy()
    for k in range(K):
        code = rest % base
        rest //= base
        hit = code > 0
        a = (code[hit] - 1) // Q
        b = (code[hit] - 1) % Q
        d_matrix[rows[hit], k * Q + a] += 1
        d_matrix[rows[hit], k * Q + b] -= 1
    return d_matrix, delta, np.stack([wit_i, wit_j], axis=1)


def _multiset_groups(table):
    """Count vectors, representative tuple index and output per multiset."""
    K, Q = table.K, table.Q
    digits = all_digits(K, Q)
    counts = np.zeros((table.size, Q), dtype=np.int16)
    rows = np.arange(table.size)
    for k in range(K):
        np.add.at(counts, (rows, digits[:, k].astype(np.int64)), 1)
    uniq, first, inverse = np.unique(counts, axis=0, return_index=True,
                                     return_inverse=True)
    group_out = table.outputs[first]
    if not np.allclose(table.outputs, group_out[inverse], rtol=0, atol=0):
        raise ConfigurationError(
            "shared_modulation requires a symmetric function; outputs differ "
            "within a value multiset")
    # keep multisets in first-appearance order so witnesses are the smallest
    # tuple indices
    order = np.argsort(first, kind="stable")
    return uniq[order], first[order].astype(np.int64), group_out[order]


def _shared_mode_constraints(table, sigma_z2):
    counts, reps, outs = _multiset_groups(table)
    P, Q = counts.shape
    enc_base = 2 * table.K + 1
    if enc_base**Q >= 2**62:
        raise CapacityError(
            f"shared-mode key space (2K+1)**Q overflows for K={table.K}, "
            f"Q={Q}")
    weights = enc_base ** np.arange(Q, dtype=np.int64)
    shifted_keys = (counts.astype(np.int64) + table.K) @ weights

    chunks = []
    rank_offset = 0
    for i in range(P - 1):
        js = np.arange(i + 1, P)
        gap = np.abs(outs[i] - outs[js])
        mask = gap > 0
        if mask.any():
            js_m = js[mask]
            # d = counts[i] - counts[j]; encode via key difference (offset
            # cancels), which is injective for entries in [-K, K]
            keys = shifted_keys[i] - shifted_keys[js_m] \
                + (np.int64(table.K) * weights).sum()
            rank = rank_offset + np.flatnonzero(mask)
            chunks.append(_reduce_by_key(
                keys, sigma_z2 * gap[mask],
                np.full(len(js_m), reps[i], dtype=np.int64),
                reps[js_m], rank))
        rank_offset += P - 1 - i
    if not chunks:
        return (np.zeros((0, Q), dtype=np.int16), np.zeros(0),
                np.zeros((0, 2), dtype=np.int64))

    keys, delta, wit_i, wit_j = _merge_reduced(chunks)
    m = len(keys)
    d_matrix = np.zeros((m, Q), dtype=np.int16)
    rest = keys.copy()
    for q in range(Q):
        d_matrix[:, q] = (rest % enc_base) - table.K
        rest //= enc_base
    return d_matrix, delta, np.stack([wit_i, wit_j], axis=1)


def build_constraints(table: FunctionTable, sigma_z2, shared_modulation=False,
                      budget=DEFAULT_ENUMERATION_BUDGET) -> ConstraintSet:
    """Enumerate and deduplicate all pairwise separation constraints.

    In full mode the difference vectors live on the concatenated alphabet
    (length ``Q*K``); with ``shared_modulation`` every node uses the same
    constellation and the differences collapse to per-value count differences
    of length ``Q`` (requires a symmetric function).
    """
    if sigma_z2 < 0:
        raise ValueError("sigma_z2 must be nonnegative")
    if table.size > budget:
        raise CapacityError(
            f"Q**K = {table.size} exceeds the enumeration budget {budget}; "
            "enable shared_modulation on a smaller table or shrink Q/K")
    if shared_modulation:
        d_matrix, delta, witnesses = _shared_mode_constraints(table, sigma_z2)
    else:
        d_matrix, delta, witnesses = _full_mode_constraints(table, sigma_z2)
    return ConstraintSet(d_matrix=d_matrix, delta=delta, witnesses=witnesses,
                         sigma_z2=float(sigma_z2),
                         shared_modulation=bool(shared_modulation),
                         kind=table.kind, K=table.K, Q=table.Q,
                         values=table.values)
