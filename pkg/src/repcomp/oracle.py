"""Independent brute-force references used by tests and experiments.

These routines deliberately avoid the solver's code paths: the exhaustive
code search enumerates every binary coding matrix via per-slot pattern
tables, and the overlap check recomputes noiseless aggregates through an
explicit selection-matrix product.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .codesign.types import Design, LiftedMatrix
from .errors import CapacityError
from .functions import ConstraintSet, FunctionTable, all_digits

EXHAUSTIVE_BUDGET = 2**20
SEQUENCE_TOL = 1e-9


@dataclass(frozen=True)
class OverlapReport:
    """Distinct-output tuple pairs that share a noiseless aggregate."""

    collisions: List[Tuple[int, int, np.ndarray]]
    exact: bool


def _pattern_table(cs: ConstraintSet, W):
    """q[e, s] = (d_e o pattern_s)^T Re(W) (d_e o pattern_s) for all 2^n
    slot patterns s (bit i of s gates coordinate i)."""
    n = cs.n
    Wr = np.ascontiguousarray(np.asarray(W).real)
    D = cs.d_matrix.astype(np.float64)
    patterns = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1)
    q = np.empty((len(cs), 2**n))
    for s in range(2**n):
        U = D * patterns[s][None, :]
        q[:, s] = np.einsum("ij,jk,ik->i", U, Wr, U, optimize=True)
    return q, patterns


def exhaustive_code_search(cs: ConstraintSet, lifted, L,
                           budget=EXHAUSTIVE_BUDGET, tol=1e-9
                           ) -> Optional[Tuple[np.ndarray, int]]:
    """Globally minimal binary coding matrix, or None when none is feasible.

    Ties are broken toward the lexicographically smallest row-major matrix.
    Guarded by ``2**(n*L) <= budget``.
    """
    n = cs.n
    W = lifted.W if isinstance(lifted, LiftedMatrix) else np.asarray(lifted)
    if 2 ** (n * L) > budget:
        raise CapacityError(
            f"2**(n*L) = 2**{n * L} exceeds the exhaustive budget {budget}")
    if len(cs) == 0:
        return np.zeros((n, L), dtype=np.int8), 0

    q, patterns = _pattern_table(cs, W)
    need = cs.delta * (1 - 1e-12) - tol
    # hardest constraints first so infeasible candidates die early
    hardness = np.argsort(-cs.delta)
    q = q[hardness]
    need = need[hardness]

    popcount = patterns.sum(axis=1)
    # candidates are L-tuples of slot patterns; iterate by total occupancy
    grids = np.meshgrid(*([np.arange(2**n)] * L), indexing="ij")
    combos = np.stack([g.reshape(-1) for g in grids], axis=1)  # (2^(nL), L)
    objective = popcount[combos].sum(axis=1)

    # row-major lexicographic key: earlier (row, slot) cells weigh more,
    # and 0 < 1, so the smallest key wins ties
    bit_weight = np.zeros((n, L), dtype=object)
    w = 1
    for i in range(n - 1, -1, -1):
        for ell in range(L - 1, -1, -1):
            bit_weight[i, ell] = w
            w <<= 1
    pattern_bits = patterns.astype(object)
    slot_keys = [pattern_bits @ bit_weight[:, ell] for ell in range(L)]

    order_levels = np.unique(objective)
    block = 4096
    for level in order_levels:
        idx = np.flatnonzero(objective == level)
        alive = idx
        for start in range(0, len(q), block):
            if len(alive) == 0:
                break
            qb = q[start:start + block]
            lhs = np.zeros((qb.shape[0], len(alive)))
            for ell in range(L):
                lhs += qb[:, combos[alive, ell]]
            ok = (lhs >= need[start:start + block, None]).all(axis=0)
            alive = alive[ok]
        if len(alive) == 0:
            continue
        keys = [sum(slot_keys[ell][combos[a, ell]] for ell in range(L))
                for a in alive]
        winner = alive[int(np.argmin(keys))]
        C = np.stack([patterns[combos[winner, ell]] for ell in range(L)],
                     axis=1).astype(np.int8)
        return C, int(level)
    return None


def noiseless_aggregates(design: Design, table: FunctionTable):
    """All noiseless received sequences via the selection-matrix product."""
    size = table.size
    digits = all_digits(table.K, table.Q).astype(np.int64)
    A = np.zeros((size, design.n), dtype=np.float64)
    rows = np.arange(size)
    if design.shared:
        for k in range(table.K):
            np.add.at(A, (rows, digits[:, k]), 1.0)
    else:
        for k in range(table.K):
            A[rows, k * table.Q + digits[:, k]] = 1.0
    return A @ (design.x[:, None] * design.C)


def overlap_check(design: Design, table: FunctionTable,
                  budget=65536, tol=SEQUENCE_TOL) -> OverlapReport:
    """Find distinct-output tuple pairs whose noiseless sequences coincide.

    One witness pair is reported per (aggregate, output pair): the earliest
    tuple index of each output value in the colliding group.
    """
    if table.size > budget:
        raise CapacityError(
            f"Q**K = {table.size} exceeds the overlap-check budget {budget}")
    V = noiseless_aggregates(design, table)
    decimals = int(-np.log10(tol) + 0.5)
    keys = np.round(V, decimals) + (0.0 + 0.0j)   # +0 normalizes -0.0
    _, first, inverse = np.unique(keys.view(np.float64).reshape(len(keys), -1),
                                  axis=0, return_index=True,
                                  return_inverse=True)
    collisions = []
    outputs = table.outputs
    for group in range(len(first)):
        members = np.flatnonzero(inverse == group)
        if len(members) < 2:
            continue
        outs = outputs[members]
        distinct = np.unique(outs)
        if len(distinct) < 2:
            continue
        firsts = [int(members[np.argmax(outs == val)]) for val in distinct]
        for a in range(len(firsts)):
            for b in range(a + 1, len(firsts)):
                i, j = sorted((firsts[a], firsts[b]))
                collisions.append((i, j, V[i].copy()))
    collisions.sort(key=lambda item: (item[0], item[1]))
    return OverlapReport(collisions=collisions, exact=not collisions)
