"""Experiment orchestration: configs, artifacts, sweeps, CSV and the CLI."""

import json
import os

import numpy as np
import pytest

from repcomp.codesign import Design
from repcomp.errors import SchemaError
from repcomp.functions import build_function_table
from repcomp.harness import (DesignSpec, ExperimentConfig, GridSpec,
                             SchemeSpec, build_design, design_from_dict,
                             design_to_dict, emit_csv, load_design,
                             run_gap_experiment, run_nmse, save_design)
from repcomp.harness.cli import main as cli_main


def small_config(tmp_path, **overrides):
    base = dict(
        function_kind="sum", K=2, Q=4,
        schemes=[SchemeSpec(scheme="repcomp", L=2),
                 SchemeSpec(scheme="digital_aircomp", L=2)],
        grid=GridSpec(kind="snr", points=[10.0, 20.0]),
        trials=64, seed=7, out=str(tmp_path / "out.csv"),
        design=DesignSpec(sigma_z2=0.01, T=6),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfig:
    def test_json_roundtrip(self, tmp_path):
        cfg = small_config(tmp_path)
        raw = cfg.to_dict()
        again = ExperimentConfig.from_dict(json.loads(json.dumps(raw)))
        assert again.to_dict() == raw

    def test_schema_errors(self):
        with pytest.raises(SchemaError):
            ExperimentConfig.from_dict({"function_kind": "sum"})
        with pytest.raises(SchemaError):
            SchemeSpec(scheme="nope")
        with pytest.raises(SchemaError):
            GridSpec(kind="fading", points=[0.1])   # missing sigma_z2
        with pytest.raises(SchemaError):
            GridSpec(kind="snr", points=[])


class TestArtifact:
    def test_bit_exact_roundtrip(self, tmp_path):
        table = build_function_table("sum", 2, 4)
        design = build_design(table, 2, DesignSpec(sigma_z2=0.01, T=6),
                              seed=3)
        path = tmp_path / "design.json"
        save_design(design, path)
        loaded = load_design(path)
        assert np.array_equal(loaded.x, design.x)          # bitwise
        assert np.array_equal(loaded.C, design.C)
        assert loaded.K == design.K and loaded.Q == design.Q
        assert loaded.kind == design.kind
        assert np.array_equal(loaded.values, design.values)
        # a second dump of the loaded design is byte-identical
        path2 = tmp_path / "design2.json"
        save_design(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_schema_keys_enforced(self):
        with pytest.raises(SchemaError):
            design_from_dict({"K": 2, "Q": 2})

    def test_schema_fields_present(self, tmp_path):
        table = build_function_table("sum", 2, 2)
        design = build_design(table, 1, DesignSpec(sigma_z2=0.01, T=4),
                              seed=0)
        doc = design_to_dict(design)
        for key in ("K", "Q", "L", "values", "function_kind", "x", "C",
                    "solver_trace", "seed"):
            assert key in doc
        assert len(doc["C"]) == len(doc["x"]) * doc["L"]


class TestRunNmse:
    def test_deterministic_and_decreasing(self, tmp_path):
        cfg = small_config(tmp_path)
        r1 = run_nmse(cfg)
        r2 = run_nmse(cfg)
        assert [row.nmse for row in r1.rows] == [row.nmse for row in r2.rows]
        assert all(row.nmse >= 0 for row in r1.rows)
        assert all(row.trials == 64 for row in r1.rows)

    def test_exact_design_zero_noise_nmse_zero(self, tmp_path):
        cfg = small_config(tmp_path,
                           schemes=[SchemeSpec(scheme="repcomp", L=2)],
                           grid=GridSpec(kind="snr", points=[300.0]))
        rows = run_nmse(cfg).rows
        assert rows[0].nmse == pytest.approx(0.0, abs=1e-12)

    def test_threads_do_not_change_results(self, tmp_path):
        cfg1 = small_config(tmp_path, threads=1)
        cfg4 = small_config(tmp_path, threads=4)
        r1 = run_nmse(cfg1)
        r4 = run_nmse(cfg4)
        assert [row.nmse for row in r1.rows] == [row.nmse for row in r4.rows]
        assert [row.stderr for row in r1.rows] == \
            [row.stderr for row in r4.rows]

    def test_stderr_matches_recomputation(self, tmp_path):
        cfg = small_config(tmp_path, trials=128,
                           schemes=[SchemeSpec(scheme="digital_aircomp",
                                               L=2)])
        row = run_nmse(cfg).rows[0]
        # recompute by hand from the per-trial substreams
        from repcomp.baselines import aircomp_estimate
        from repcomp.harness.experiments import _model_for, trial_rng
        table = build_function_table("sum", 2, 4)
        model = _model_for(cfg, cfg.grid.points[0], 1.0)
        errs = []
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, 0, 0, t)
            g = int(rng.integers(table.size))
            f = table.outputs[g]
            est = aircomp_estimate(table, g, 2, model, 10.0, rng)
            errs.append((f - est) ** 2 / f ** 2)
        errs = np.array(errs)
        assert row.nmse == pytest.approx(errs.mean(), rel=1e-12)
        assert row.stderr == pytest.approx(
            errs.std(ddof=1) / np.sqrt(len(errs)), rel=1e-12)

    def test_single_trial_arithmetic(self, tmp_path):
        """One trial with known truth and estimate: (10-9)^2/100 = 0.01."""
        f, f_hat = 10.0, 9.0
        assert (f - f_hat) ** 2 / f ** 2 == pytest.approx(0.01)


class TestGapExperiment:
    def test_small_gap_run(self, tmp_path):
        cfg = ExperimentConfig(
            function_kind="product", K=3, Q=4,
            schemes=[SchemeSpec(scheme="repcomp", L=2)],
            grid=GridSpec(kind="nodes", points=[2, 3]),
            trials=1, seed=1, out=str(tmp_path / "gap.csv"),
            design=DesignSpec(sigma_z2=1e-3, T=6),
        )
        result = run_gap_experiment(cfg)
        by_scheme = {}
        for row in result.rows:
            by_scheme.setdefault(row.scheme, []).append(row.nmse)
        assert set(by_scheme) == {"empirical_gap", "analytical_bound"}
        for emp, bound in zip(by_scheme["empirical_gap"],
                              by_scheme["analytical_bound"]):
            assert 0 <= emp <= bound


class TestCsv:
    def test_emit_and_layout(self, tmp_path):
        cfg = small_config(tmp_path, trials=16)
        result = run_nmse(cfg)
        path = emit_csv(result, cfg.out)
        text = open(path, "rb").read().decode()
        lines = text.split("\n")
        assert lines[0] == "grid,scheme,L,nmse,stderr,trials"
        assert lines[-1] == ""
        assert "\r" not in text
        assert len(lines) == len(result.rows) + 2

    def test_empty_result_header_only(self, tmp_path):
        from repcomp.harness.experiments import ExperimentResult
        path = emit_csv(ExperimentResult(), tmp_path / "empty.csv")
        assert open(path).read() == "grid,scheme,L,nmse,stderr,trials\n"

    def test_rerun_byte_identical(self, tmp_path):
        cfg = small_config(tmp_path, trials=32)
        p1 = emit_csv(run_nmse(cfg), tmp_path / "a.csv")
        p2 = emit_csv(run_nmse(cfg), tmp_path / "b.csv")
        assert open(p1, "rb").read() == open(p2, "rb").read()


class TestCli:
    def _write_config(self, tmp_path, payload, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    def test_design_validate_cycle(self, tmp_path):
        cfg = self._write_config(tmp_path, {
            "function_kind": "sum", "K": 2, "Q": 4, "L": 2,
            "design": {"sigma_z2": 0.01, "T": 6}, "seed": 3,
        })
        artifact = str(tmp_path / "design.json")
        assert cli_main(["design", "--config", cfg, "--out", artifact]) == 0
        assert os.path.getsize(artifact) > 0
        vcfg = self._write_config(tmp_path, {"artifact": artifact},
                                  name="val.json")
        assert cli_main(["validate", "--config", vcfg]) == 0

    def test_sweep_snr_deterministic_csv(self, tmp_path):
        cfg = self._write_config(tmp_path, {
            "function_kind": "sum", "K": 2, "Q": 4,
            "schemes": [{"scheme": "repcomp", "L": 2}],
            "grid": {"kind": "snr", "points": [15.0, 25.0]},
            "trials": 32, "seed": 5,
            "design": {"sigma_z2": 0.01, "T": 6},
        })
        out1, out2 = str(tmp_path / "r1.csv"), str(tmp_path / "r2.csv")
        assert cli_main(["sweep-snr", "--config", cfg, "--out", out1]) == 0
        assert cli_main(["sweep-snr", "--config", cfg, "--out", out2]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_wrong_grid_kind_fails(self, tmp_path):
        cfg = self._write_config(tmp_path, {
            "function_kind": "sum", "K": 2, "Q": 4,
            "schemes": [{"scheme": "repcomp", "L": 1}],
            "grid": {"kind": "snr", "points": [15.0]},
            "trials": 8, "seed": 5, "out": str(tmp_path / "x.csv"),
        })
        assert cli_main(["sweep-fading", "--config", cfg]) == 1

    def test_missing_out_fails(self, tmp_path):
        cfg = self._write_config(tmp_path, {
            "function_kind": "sum", "K": 2, "Q": 4,
            "schemes": [{"scheme": "repcomp", "L": 1}],
            "grid": {"kind": "snr", "points": [15.0]},
            "trials": 8, "seed": 5,
        })
        assert cli_main(["simulate", "--config", cfg]) == 1

    def test_seed_override_changes_output(self, tmp_path):
        cfg = self._write_config(tmp_path, {
            "function_kind": "sum", "K": 2, "Q": 4,
            "schemes": [{"scheme": "digital_aircomp", "L": 2}],
            "grid": {"kind": "snr", "points": [10.0]},
            "trials": 64, "seed": 5,
        })
        out1, out2 = str(tmp_path / "s1.csv"), str(tmp_path / "s2.csv")
        assert cli_main(["simulate", "--config", cfg, "--out", out1]) == 0
        assert cli_main(["simulate", "--config", cfg, "--out", out2,
                         "--seed", "6"]) == 0
        assert open(out1).read() != open(out2).read()
