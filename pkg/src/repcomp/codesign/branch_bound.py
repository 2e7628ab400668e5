"""Branch and bound projection of the fractional coding matrix.

Nodes carry per-variable 0/1 pins; the linear relaxation supplies lower
bounds (integral at binary points, so bounds are rounded up), and incumbents
are accepted only if they satisfy the exact quadratic constraints.  The
search is best-bound first with depth as a tie-break, which keeps the tree
small while staying deterministic.
"""

import heapq
import itertools
import math

import numpy as np

from ..errors import InfeasibleSubproblemError, RepcompError
from ..functions import ConstraintSet
from .relaxation import (assemble_lp, lifted_quadratic, mccormick_bounds,
                         solve_lp_given_rows)
from .types import LiftedMatrix

_INT_TOL = 1e-6


def quadratics_satisfied(cs: ConstraintSet, W, C, tol=1e-9):
    """Directly check every separation quadratic at a binary C."""
    if len(cs) == 0:
        return True
    vals = lifted_quadratic(cs, W, C)
    return bool(np.all(vals >= cs.delta * (1 - 1e-12) - tol))


def _certificate(cs: ConstraintSet, W):
    """Worst-violated constraint at the all-ones coding matrix."""
    ones = np.ones((cs.n, 1))
    vals = lifted_quadratic(cs, W, ones)
    worst = int(np.argmax(cs.delta - vals))
    return worst, tuple(int(w) for w in cs.witnesses[worst])


def branch_and_bound(cs: ConstraintSet, lifted, L, delta_bb=1e-6,
                     node_cap=200_000, tol=1e-9):
    """Minimum-occupancy binary coding matrix meeting all quadratics.

    Returns an (n, L) 0/1 matrix whose objective matches the exhaustive
    optimum to within ``delta_bb`` (exactly, for integral objectives).
    ``tol`` is the slack allowed when checking the quadratics directly
    (match it to the feasibility solver's residual tolerance).

    Raises:
        InfeasibleSubproblemError: no binary point satisfies the quadratics.
    """
    n = cs.n
    W = lifted.W if isinstance(lifted, LiftedMatrix) else np.asarray(lifted)
    if len(cs) == 0:
        return np.zeros((n, L), dtype=np.int8)

    bounds = mccormick_bounds(cs, W)
    A_neg, rhs_neg = assemble_lp(cs, bounds, L)
    nl = n * L

    def as_matrix(z):
        return z.reshape(L, n).T

    def true_feasible(z):
        return quadratics_satisfied(cs, W, as_matrix(z), tol=tol)

    incumbent = None
    incumbent_obj = math.inf
    offered = set()

    def offer(z):
        nonlocal incumbent, incumbent_obj
        z = np.round(np.clip(z, 0, 1)).astype(np.int8)
        key = z.tobytes()
        if key in offered:
            return
        offered.add(key)
        obj = int(z.sum())
        if obj < incumbent_obj and true_feasible(z):
            incumbent, incumbent_obj = z, obj

    # cheap seed: full occupancy
    offer(np.ones(nl))

    counter = itertools.count()
    heap = []

    def push(lo, hi, depth):
        try:
            frac = solve_lp_given_rows(A_neg, rhs_neg, n, L,
                                       var_lower=lo, var_upper=hi)
        except InfeasibleSubproblemError:
            return
        z = frac.T.reshape(-1)
        lp_obj = float(z.sum())
        lb = math.ceil(lp_obj - _INT_TOL)
        if lb >= incumbent_obj:
            return
        heapq.heappush(heap, (lb, -depth, next(counter), lo, hi, z))

    push(np.zeros(nl), np.ones(nl), 0)

    nodes = 0
    while heap:
        lb, negdepth, _, lo, hi, z = heapq.heappop(heap)
        if lb >= incumbent_obj:
            continue
        nodes += 1
        if nodes > node_cap:
            if incumbent is not None:
                break   # best-so-far; only exactness at the cap is lost
            raise RepcompError(
                f"branch-and-bound node cap {node_cap} exceeded with no "
                "incumbent")

        offer(z)   # rounded LP point often seeds a good upper bound
        if lb >= incumbent_obj:
            continue
        frac_dist = np.abs(z - np.round(z))
        free = hi - lo > 0.5
        if frac_dist.max() <= _INT_TOL:
            # integral LP point that fails the quadratics: branch on the
            # first free variable to carve the node further
            if not free.any():
                continue
            branch_var = int(np.flatnonzero(free)[0])
        else:
            candidates = np.where(free, -np.abs(frac_dist - 0.5), -np.inf)
            branch_var = int(np.argmax(candidates))
        depth = -negdepth
        for value in (0.0, 1.0):
            lo2, hi2 = lo.copy(), hi.copy()
            lo2[branch_var] = hi2[branch_var] = value
            push(lo2, hi2, depth + 1)

    if incumbent is None:
        worst, witness = _certificate(cs, W)
        raise InfeasibleSubproblemError(
            "no binary coding matrix satisfies the separation quadratics; "
            f"tightest violated constraint {worst}",
            constraint_index=worst, witness=witness)
    return as_matrix(incumbent).astype(np.int8)
