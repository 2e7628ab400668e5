"""Joint modulation / repetition-code design solver."""

from .alternation import (ValidationReport, alternate_design, gap_bound,
                          initial_modulation, margin_ratio, tune_modulation,
                          validate_design)
from .branch_bound import branch_and_bound, quadratics_satisfied
from .feasibility import (extract_rank_one, project_spectrahedron,
                          solve_modulation_feasibility)
from .relaxation import (FactorBounds, McCormickBounds, box_bounds,
                         design_quadratic, lifted_quadratic, mccormick_bounds,
                         quadratic_value, relaxation_gap_limit,
                         solve_lp_relaxation, split_complex_factors,
                         tangent_value)
from .structured import amplitude_split_design
from .types import Design, LiftedMatrix, SolveParams

__all__ = [
    "Design",
    "FactorBounds",
    "LiftedMatrix",
    "McCormickBounds",
    "SolveParams",
    "ValidationReport",
    "alternate_design",
    "amplitude_split_design",
    "box_bounds",
    "branch_and_bound",
    "design_quadratic",
    "extract_rank_one",
    "gap_bound",
    "initial_modulation",
    "lifted_quadratic",
    "margin_ratio",
    "mccormick_bounds",
    "tune_modulation",
    "project_spectrahedron",
    "quadratic_value",
    "quadratics_satisfied",
    "relaxation_gap_limit",
    "solve_lp_relaxation",
    "split_complex_factors",
    "tangent_value",
    "validate_design",
]
