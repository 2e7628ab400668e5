"""Command-line front end.

Subcommands:
    design       build a design and save it as a JSON artifact
    validate     check an artifact against its separation constraints
    simulate     run the configured grid (intended for single-point grids)
    sweep-snr    NMSE over an SNR grid
    sweep-fading NMSE over a fading-variance grid
    gap          measured vs analytic optimality gap over node counts

Exit codes: 0 success, 2 infeasible design (or failed validation),
1 any other error.
"""

import argparse
import json
import sys

from ..codesign import validate_design
from ..errors import DesignInfeasibleError, RepcompError, SchemaError
from ..functions import build_constraints, build_function_table
from .artifact import load_design, save_design
from .config import DesignSpec, ExperimentConfig
from .experiments import (build_design, emit_csv, run_gap_experiment,
                          run_nmse)


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _experiment_config(args):
    raw = _load_json(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.threads is not None:
        raw["threads"] = args.threads
    cfg = ExperimentConfig.from_dict(raw)
    if args.out is not None:
        cfg.out = args.out
    if cfg.out is None:
        raise SchemaError("an output path is required (--out or config.out)")
    return cfg


def _cmd_design(args):
    raw = _load_json(args.config)
    for key in ("function_kind", "K", "Q", "L"):
        if key not in raw:
            raise SchemaError(f"design config is missing {key!r}")
    table = build_function_table(raw["function_kind"], int(raw["K"]),
                                 int(raw["Q"]), values=raw.get("values"))
    spec = DesignSpec(**raw.get("design", {}))
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    out = args.out or raw.get("out")
    if out is None:
        raise SchemaError("an output path is required (--out or config.out)")
    design = build_design(table, int(raw["L"]), spec, seed)
    save_design(design, out)
    print(f"design written to {out} "
          f"({design.meta.get('validation', 'no validation info')})")
    return 0


def _cmd_validate(args):
    raw = _load_json(args.config)
    if "artifact" not in raw:
        raise SchemaError("validate config needs an 'artifact' path")
    design = load_design(raw["artifact"])
    table = build_function_table(design.kind, design.K, design.Q,
                                 values=design.values)
    sigma = raw.get("sigma_z2")
    if sigma is None:
        sigma = design.meta.get("design_sigma_z2", 0.0)
    cs = build_constraints(table, float(sigma),
                           shared_modulation=design.shared and design.K > 1)
    report = validate_design(design, cs)
    print(report.summary())
    for entry, witness, lhs, needed in report.violations[:20]:
        print(f"  violated #{entry}: pair {witness}, "
              f"lhs {lhs:.6g} < required {needed:.6g}")
    if len(report.violations) > 20:
        print(f"  ... and {len(report.violations) - 20} more")
    return 0 if report.ok else 2


def _cmd_sweep(args, expect_kind=None):
    cfg = _experiment_config(args)
    if expect_kind and cfg.grid.kind != expect_kind:
        raise SchemaError(
            f"this subcommand needs grid kind {expect_kind!r}, "
            f"got {cfg.grid.kind!r}")
    result = run_nmse(cfg)
    emit_csv(result, cfg.out)
    print(f"{len(result.rows)} rows written to {cfg.out}")
    return 0


def _cmd_gap(args):
    cfg = _experiment_config(args)
    result = run_gap_experiment(cfg)
    emit_csv(result, cfg.out)
    print(f"{len(result.rows)} rows written to {cfg.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="repcomp",
        description="Design and simulate repetition-coded computation "
                    "over a shared channel")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("design", "build a design and save the artifact"),
            ("validate", "check an artifact against its constraints"),
            ("simulate", "simulate the configured grid point(s)"),
            ("sweep-snr", "NMSE sweep over SNR"),
            ("sweep-fading", "NMSE sweep over fading variance"),
            ("gap", "optimality-gap experiment over node counts")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for trials")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "design":
            code = _cmd_design(args)
        elif args.command == "validate":
            code = _cmd_validate(args)
        elif args.command == "simulate":
            code = _cmd_sweep(args)
        elif args.command == "sweep-snr":
            code = _cmd_sweep(args, expect_kind="snr")
        elif args.command == "sweep-fading":
            code = _cmd_sweep(args, expect_kind="fading")
        else:
            code = _cmd_gap(args)
    except DesignInfeasibleError as err:
        print(f"infeasible design: {err}", file=sys.stderr)
        return 2
    except (RepcompError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
