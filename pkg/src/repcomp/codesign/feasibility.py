"""Feasibility solve for the lifted modulation matrix.

Given a coding matrix C, the separation constraints become linear in the
lifted variable W: each entry contributes ``<W, B_e> >= delta_e`` where
``B_e = sum_l (d_e o c_l)(d_e o c_l)^T``.  The solver alternates projections
between the spectrahedron ``{W PSD, tr W <= 1}`` (eigenvalue clamp plus trace
rescale) and the violated half-spaces, using an extrapolated parallel step so
large constraint sets stay cheap.  An external conic solver could replace
this routine behind the same contract.
"""

import numpy as np

from ..errors import InfeasibleSubproblemError
from ..functions import ConstraintSet
from .types import LiftedMatrix, SolveParams


def slot_factors(cs: ConstraintSet, C):
    """Per-slot gated difference vectors ``u_{e,l} = d_e o c_l``.

    Returns a list with one (m, n) float array per slot.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != cs.n:
        raise ValueError(f"C must have shape ({cs.n}, L), got {C.shape}")
    if C.min() < -1e-12 or C.max() > 1 + 1e-12:
        raise ValueError("C entries must lie in [0, 1]")
    D = cs.d_matrix.astype(np.float64)
    return [D * C[:, ell][None, :] for ell in range(C.shape[1])]


def constraint_values(factors, W):
    """Vector of ``<W, B_e>`` for every constraint entry."""
    Wr = np.ascontiguousarray(W.real)
    total = np.zeros(factors[0].shape[0])
    for U in factors:
        total += np.einsum("ij,jk,ik->i", U, Wr, U, optimize=True)
    return total


def _factor_gram_norms(factors):
    """Squared Frobenius norms ``||B_e||_F^2`` for every entry."""
    m = factors[0].shape[0]
    norms = np.zeros(m)
    for a in range(len(factors)):
        for b in range(len(factors)):
            norms += (factors[a] * factors[b]).sum(axis=1) ** 2
    return norms


def project_spectrahedron(W):
    """Clamp negative eigenvalues, then rescale the trace down to one."""
    W = 0.5 * (W + W.conj().T)
    vals, vecs = np.linalg.eigh(W)
    vals = np.clip(vals, 0.0, None)
    W = (vecs * vals) @ vecs.conj().T
    tr = vals.sum()
    if tr > 1.0:
        W = W / tr
    return 0.5 * (W + W.conj().T)


def solve_modulation_feasibility(cs: ConstraintSet, C, params: SolveParams,
                                 start=None) -> LiftedMatrix:
    """Find a PSD, trace<=1 matrix meeting every separation constraint.

    Args:
        cs: deduplicated separation constraints.
        C: coding matrix, binary or fractional in [0, 1], shape (n, L).
        params: solver tolerances (``eps_sdp``, sweep caps).
        start: optional warm-start matrix.

    Raises:
        InfeasibleSubproblemError: when a trace certificate rules the system
            out, or the residual stalls above ``eps_sdp``.
    """
    n = cs.n
    if len(cs) == 0:
        return LiftedMatrix(np.eye(n, dtype=np.complex128) / n)

    factors = slot_factors(cs, C)
    # trace(B_e) bounds <W, B_e> over the spectrahedron; below-threshold
    # entries certify infeasibility outright
    traces = np.zeros(len(cs))
    for U in factors:
        traces += (U * U).sum(axis=1)
    hopeless = traces < cs.delta - 1e-15
    if hopeless.any():
        worst = int(np.argmax(cs.delta - traces))
        raise InfeasibleSubproblemError(
            "no trace<=1 PSD matrix can reach the separation threshold "
            f"of constraint {worst} (needs {cs.delta[worst]:.6g}, "
            f"attainable at most {traces[worst]:.6g})",
            constraint_index=worst,
            witness=tuple(int(w) for w in cs.witnesses[worst]))

    gram = _factor_gram_norms(factors)
    active = gram > 1e-30

    if start is None:
        W = np.eye(n, dtype=np.complex128) / n
    else:
        W = project_spectrahedron(np.asarray(start, dtype=np.complex128))

    residuals = []
    frozen = 0
    for sweep in range(params.sdp_max_sweeps):
        vals = constraint_values(factors, W)
        viol = cs.delta - vals
        worst = float(viol.max())
        residuals.append(worst)
        if worst <= params.eps_sdp:
            return LiftedMatrix(W)

        hit = active & (viol > 0)
        mu = np.zeros(len(cs))
        mu[hit] = viol[hit] / gram[hit]
        # extrapolated parallel projection onto the violated half-spaces:
        # with equal weights the extrapolated step reduces to
        # (sum mu^2 ||B||^2 / ||sum mu B||^2) * sum mu B
        step = np.zeros((n, n))
        for U in factors:
            step += (U * mu[:, None]).T @ U
        step_norm2 = float((step * step).sum())
        if step_norm2 <= 0:
            break
        coeff = float((mu[hit] ** 2 * gram[hit]).sum()) / step_norm2
        W_next = project_spectrahedron(W + coeff * step)
        moved = float(np.linalg.norm(W_next - W, "fro"))
        W = W_next
        # a frozen iterate with residual left is a least-violation fixed
        # point: the intersection is empty
        frozen = frozen + 1 if moved <= 1e-12 * max(1.0, worst) else 0
        if frozen >= 3:
            break

        window = params.sdp_stall_window
        if sweep >= 2 * window and worst > params.eps_sdp:
            past = residuals[-window]
            if worst > 0.999 * past:
                break

    vals = constraint_values(factors, W)
    worst = int(np.argmax(cs.delta - vals))
    raise InfeasibleSubproblemError(
        "feasibility residual stalled at "
        f"{float((cs.delta - vals).max()):.3e} (tolerance {params.eps_sdp:g}) "
        f"after {len(residuals)} sweeps; worst constraint {worst}",
        constraint_index=worst,
        witness=tuple(int(w) for w in cs.witnesses[worst]))


def extract_rank_one(lifted) -> np.ndarray:
    """Best rank-one factor of a PSD matrix: sqrt of the top eigenvalue times
    its eigenvector, with the largest-magnitude entry rotated to be real
    positive so repeated runs agree bit for bit."""
    W = lifted.W if isinstance(lifted, LiftedMatrix) else np.asarray(lifted)
    vals, vecs = np.linalg.eigh(W)
    top = float(max(vals[-1], 0.0))
    x = np.sqrt(top) * vecs[:, -1].astype(np.complex128)
    if top > 0:
        pivot = np.argmax(np.abs(x))
        phase = x[pivot]
        if np.abs(phase) > 0:
            x = x * (np.abs(phase) / phase)
    return x
