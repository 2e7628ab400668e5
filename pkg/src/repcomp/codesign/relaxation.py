"""Linear relaxation of the coding-matrix subproblem.

With the modulation fixed (through its lifted matrix W), each separation
constraint is a quadratic in the coding matrix built from the Hermitian PSD
matrix ``M_e = (d_e d_e^T) o W``: eigendecomposing M_e and splitting each
scaled eigenvector into real and imaginary parts gives real factors p with

    h_e(C) = sum_l sum_m (p_m . c_l)^2 .

Bounding each bilinear term ``p_m . c_l`` over the unit box by
``l_m = sum_n min(0, p_mn)`` and ``u_m = sum_n max(0, p_mn)`` yields two
linear families valid for every box point with ``h_e(C) >= delta_e``
(each tangent sum differs from h by at most ``L * ||u - l||^2``), so the
resulting program lower-bounds the exhaustive binary optimum.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ..errors import InfeasibleSubproblemError
from ..functions import ConstraintSet
from .types import LiftedMatrix

FACTOR_EIGENVALUE_FLOOR = 1e-10


@dataclass(frozen=True)
class FactorBounds:
    """Real rank-one factors of one constraint with their box bounds."""

    P: np.ndarray   # (r, n) real factors
    l: np.ndarray   # (r,) lower bounds of p.c over the unit box
    u: np.ndarray   # (r,) upper bounds

    @property
    def rank(self):
        return self.P.shape[0]


@dataclass(frozen=True)
class McCormickBounds:
    """Per-constraint factor decompositions and bilinear bounds."""

    entries: List[FactorBounds]

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def split_complex_factors(M, eig_floor=FACTOR_EIGENVALUE_FLOOR):
    """Real factors P with ``sum_m p_m p_m^T = M`` for Hermitian PSD M."""
    vals, vecs = np.linalg.eigh(M)
    rows = []
    for lam, vec in zip(vals, vecs.T):
        if lam < eig_floor:
            continue
        scaled = np.sqrt(lam) * vec
        for part in (scaled.real, scaled.imag):
            if np.abs(part).max() > 1e-12:
                rows.append(part)
    n = M.shape[0]
    if not rows:
        return np.zeros((0, n))
    return np.array(rows)


def box_bounds(P):
    """Lower/upper bounds of ``p . c`` over c in [0, 1]^n, per row of P."""
    l = np.minimum(P, 0.0).sum(axis=1)
    u = np.maximum(P, 0.0).sum(axis=1)
    return l, u


def mccormick_bounds(cs: ConstraintSet, lifted,
                     chunk=2048) -> McCormickBounds:
    """Factor every constraint's quadratic and bound its bilinear terms.

    The per-entry Hermitian matrices are eigendecomposed in stacked batches;
    each kept eigenvector splits into its real and imaginary parts.
    """
    W = lifted.W if isinstance(lifted, LiftedMatrix) else np.asarray(lifted)
    W = np.asarray(W, dtype=np.complex128)
    n = cs.n
    entries = []
    D = cs.d_matrix.astype(np.float64)
    for start in range(0, len(cs), chunk):
        block = D[start:start + chunk]                       # (b, n)
        M = block[:, :, None] * block[:, None, :] * W[None, :, :]
        vals, vecs = np.linalg.eigh(M)                       # (b, n), (b, n, n)
        scaled = np.sqrt(np.clip(vals, 0.0, None))[:, None, :] * vecs
        keep = vals >= FACTOR_EIGENVALUE_FLOOR
        for b in range(len(block)):
            rows = []
            for r in np.flatnonzero(keep[b]):
                col = scaled[b, :, r]
                for part in (col.real, col.imag):
                    if np.abs(part).max() > 1e-12:
                        rows.append(part)
            P = np.array(rows) if rows else np.zeros((0, n))
            l, u = box_bounds(P)
            entries.append(FactorBounds(P=P, l=l, u=u))
    return McCormickBounds(entries)


def quadratic_value(fb: FactorBounds, C):
    """Exact constraint quadratic ``h(C) = sum_l sum_m (p_m . c_l)^2``."""
    T = fb.P @ np.asarray(C, dtype=np.float64)   # (r, L)
    return float((T * T).sum())


def tangent_value(fb: FactorBounds, C):
    """Piecewise tangent minorant ``max`` of the l- and u-anchored sums."""
    C = np.asarray(C, dtype=np.float64)
    L = C.shape[1]
    T = fb.P @ C
    low = float((2.0 * fb.l[:, None] * T).sum() - L * (fb.l ** 2).sum())
    high = float((2.0 * fb.u[:, None] * T).sum() - L * (fb.u ** 2).sum())
    return max(low, high)


def relaxation_gap_limit(fb: FactorBounds, L):
    """Upper bound ``L * ||u - l||^2`` on ``h - tangent_value`` over the box."""
    return float(L * ((fb.u - fb.l) ** 2).sum())


def design_quadratic(cs: ConstraintSet, x, C):
    """LHS of every separation constraint for a concrete modulation vector."""
    x = np.asarray(x, dtype=np.complex128)
    C = np.asarray(C, dtype=np.float64)
    gated = cs.d_matrix.astype(np.float64)[:, :, None] * C[None, :, :]
    proj = np.einsum("mnl,n->ml", gated, x, optimize=True)
    return (np.abs(proj) ** 2).sum(axis=1)


def lifted_quadratic(cs: ConstraintSet, W, C):
    """LHS ``sum_l c_l^T ((d d^T) o W) c_l`` for every constraint."""
    W = W.W if isinstance(W, LiftedMatrix) else np.asarray(W)
    Wr = np.ascontiguousarray(W.real)
    C = np.asarray(C, dtype=np.float64)
    D = cs.d_matrix.astype(np.float64)
    total = np.zeros(len(cs))
    for ell in range(C.shape[1]):
        U = D * C[:, ell][None, :]
        total += np.einsum("ij,jk,ik->i", U, Wr, U, optimize=True)
    return total


def lp_constraint_rows(cs: ConstraintSet, bounds: McCormickBounds, L):
    """Coefficients and right-hand sides of the linear families.

    Rows are expressed as ``a . c_l summed over slots >= rhs``; the slot
    blocks share one coefficient vector because the bounds do not depend on
    the slot index.  Besides the two tangent families (anchored at l and u,
    shifted by the worst-case tangent gap), the secant over-envelope of each
    squared term is added: all three hold for every box point that meets the
    quadratic threshold, so the program stays a valid lower bound.
    """
    n = cs.n
    coefs = []
    rhs = []
    for e in range(len(cs)):
        fb = bounds[e]
        gap = relaxation_gap_limit(fb, L)
        if fb.rank:
            a_low = 2.0 * (fb.l[:, None] * fb.P).sum(axis=0)
            a_high = 2.0 * (fb.u[:, None] * fb.P).sum(axis=0)
            a_secant = ((fb.l + fb.u)[:, None] * fb.P).sum(axis=0)
        else:
            a_low = a_high = a_secant = np.zeros(n)
        coefs.append(a_low)
        rhs.append(cs.delta[e] + L * (fb.l ** 2).sum() - gap)
        coefs.append(a_high)
        rhs.append(cs.delta[e] + L * (fb.u ** 2).sum() - gap)
        coefs.append(a_secant)
        rhs.append(cs.delta[e] + L * (fb.l * fb.u).sum())
    return np.array(coefs), np.array(rhs)


def solve_lp_given_rows(A_ub_neg, rhs_neg, n, L, var_lower=None,
                        var_upper=None):
    """Occupancy-minimizing LP with prebuilt rows (see lp_constraint_rows);
    rows arrive already negated for the <= form."""
    nl = n * L
    lo = np.zeros(nl) if var_lower is None else np.asarray(var_lower, float)
    hi = np.ones(nl) if var_upper is None else np.asarray(var_upper, float)
    if A_ub_neg is None or A_ub_neg.shape[0] == 0:
        if np.any(lo > hi + 1e-12):
            raise InfeasibleSubproblemError("conflicting variable bounds")
        return lo.reshape(L, n).T.copy()
    res = linprog(c=np.ones(nl), A_ub=A_ub_neg, b_ub=rhs_neg,
                  bounds=list(zip(lo, hi)), method="highs")
    if res.status == 2:
        raise InfeasibleSubproblemError("linear relaxation is infeasible")
    if not res.success:
        raise InfeasibleSubproblemError(
            f"linear relaxation solve failed: {res.message}")
    return res.x.reshape(L, n).T.copy()


def assemble_lp(cs: ConstraintSet, bounds: McCormickBounds, L):
    """Negated constraint matrix/rhs ready for repeated LP solves.

    Rows that hold everywhere on the box (their minimum attainable left side
    already clears the right side) are dropped, and large systems are handed
    over as sparse matrices.
    """
    coefs, rhs = lp_constraint_rows(cs, bounds, L)
    if len(rhs):
        row_min = L * np.minimum(coefs, 0.0).sum(axis=1)
        live = row_min < rhs - 1e-15
        coefs, rhs = coefs[live], rhs[live]
    # variables are slot-major: z = [c_1; c_2; ...]; every slot block gets
    # the same coefficient vector
    A = -np.tile(coefs, (1, L))
    if A.shape[0] > 2000:
        A = sparse.csr_matrix(A)
    return A, -rhs


def solve_lp_relaxation(cs: ConstraintSet, lifted, L, bounds=None,
                        var_lower=None, var_upper=None):
    """Minimize the total slot occupancy over the relaxed feasible box.

    Returns the fractional coding matrix of shape (n, L).  ``var_lower`` /
    ``var_upper`` optionally pin individual entries (used while branching).
    """
    n = cs.n
    if L < 1:
        raise ValueError("L must be >= 1")
    if len(cs) == 0:
        nl = n * L
        lo = np.zeros(nl) if var_lower is None else np.asarray(var_lower,
                                                               float)
        hi = np.ones(nl) if var_upper is None else np.asarray(var_upper,
                                                              float)
        if np.any(lo > hi + 1e-12):
            raise InfeasibleSubproblemError("conflicting variable bounds")
        return lo.reshape(L, n).T.astype(np.float64).copy()

    if bounds is None:
        bounds = mccormick_bounds(cs, lifted)
    A_neg, rhs_neg = assemble_lp(cs, bounds, L)
    return solve_lp_given_rows(A_neg, rhs_neg, n, L, var_lower, var_upper)
