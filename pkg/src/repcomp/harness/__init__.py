"""Experiment orchestration: configs, design artifacts, sweeps and the CLI."""

from .artifact import (design_from_dict, design_to_dict, load_design,
                       save_design)
from .config import DesignSpec, ExperimentConfig, GridSpec, SchemeSpec
from .experiments import (DesignCache, ExperimentResult, ResultRow,
                          build_design, emit_csv, run_gap_experiment,
                          run_nmse, trial_rng)

__all__ = [
    "DesignCache",
    "DesignSpec",
    "ExperimentConfig",
    "ExperimentResult",
    "GridSpec",
    "ResultRow",
    "SchemeSpec",
    "build_design",
    "design_from_dict",
    "design_to_dict",
    "emit_csv",
    "load_design",
    "run_gap_experiment",
    "run_nmse",
    "save_design",
    "trial_rng",
]
