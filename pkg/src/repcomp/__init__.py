"""Repetition-coded computation over a shared multiple-access channel.

The package designs digital constellations jointly with binary repetition
codes so a receiver can evaluate a function of many nodes' values from the
superimposed signal, and measures the resulting computation error under
noise and fading against standard baselines.
"""

from .channel import ChannelModel, snr_db, transmit
from .codesign import (Design, LiftedMatrix, SolveParams, alternate_design,
                       branch_and_bound, extract_rank_one, gap_bound,
                       mccormick_bounds, solve_lp_relaxation,
                       solve_modulation_feasibility, validate_design)
from .decoder import Codebook, build_codebook, decode
from .functions import (ConstraintSet, FunctionTable, build_constraints,
                        build_function_table, selection_vector)
from .oracle import OverlapReport, exhaustive_code_search, overlap_check

__all__ = [
    "ChannelModel",
    "Codebook",
    "ConstraintSet",
    "Design",
    "FunctionTable",
    "LiftedMatrix",
    "OverlapReport",
    "SolveParams",
    "alternate_design",
    "branch_and_bound",
    "build_codebook",
    "build_constraints",
    "build_function_table",
    "decode",
    "exhaustive_code_search",
    "extract_rank_one",
    "gap_bound",
    "mccormick_bounds",
    "overlap_check",
    "selection_vector",
    "snr_db",
    "solve_lp_relaxation",
    "solve_modulation_feasibility",
    "transmit",
    "validate_design",
]

__version__ = "0.1.0"
