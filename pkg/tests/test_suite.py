import dataclasses
import json

import numpy as np
import pytest

import core.suite as suite
from core.errors import SpecError
from core.exporter import ReportExporter
from core.manifest import ManifestLoader
from core.suite import (
    CaseOutcome,
    RunConfig,
    SuiteResult,
    SuiteRunner,
    execute_case,
    expand_case,
    export_outcome,
    export_suite,
    run_case,
)


def config(command, **kwargs):
    return RunConfig(command=command, **kwargs)


class TestRunConfig:
    def test_from_mapping_renames_bounds_and_coerces(self):
        cfg = RunConfig.from_mapping(
            {"name": "x", "command": "exponent", "n": "3", "lambda": "1", "Lambda": 4, "tol": None}
        )
        assert (cfg.n, cfg.lam, cfg.Lam, cfg.tol) == (3, 1.0, 4.0, None)
        payload = cfg.to_dict()
        assert payload["lambda"] == 1.0 and "lam" not in payload

    def test_label_falls_back_to_command(self):
        assert config("naive").label == "naive"
        assert RunConfig.from_mapping({"command": "naive", "n": 7}).name == "naive"


class TestRunners:
    def test_exponent_single(self):
        outcome = run_case(config("exponent", n=2, lam=1.0, Lam=4.0))
        assert outcome.passed
        assert outcome.result["alpha"] == pytest.approx(0.5)
        assert outcome.result["crossover_ratio"] == pytest.approx(1.0)

    def test_exponent_sweep_table(self):
        outcome = run_case(config("exponent", sweep="n=2..8,ratio=0.1..1.0x10"))
        columns, rows = outcome.table
        assert len(rows) == 70 and len(columns) == 6
        assert outcome.passed

    def test_exponent_checks_special_cases(self):
        outcome = run_case(config("exponent", n=5, lam=2.0, Lam=2.0))
        assert outcome.passed
        assert outcome.result["alpha"] == pytest.approx(1.0)
        assert outcome.result["closed_form_gap"] <= 1e-12
        isotropic = run_case(config("exponent", sweep="n=2..10,ratio=1..1x1"))
        assert isotropic.passed and len(isotropic.table[1]) == 9

    def test_exponent_gap_is_gated_by_tolerance(self):
        outcome = run_case(config("exponent", n=2, lam=1.0, Lam=3.0, tol=-1.0))
        assert not outcome.passed

    def test_exponent_requires_bounds(self):
        with pytest.raises(SpecError, match="lambda, Lambda"):
            run_case(config("exponent", n=3))

    def test_optimize(self):
        outcome = run_case(config("optimize", n=3, lam=1.0, Lam=4.0, resolution=400))
        assert outcome.passed
        columns, data = outcome.plots["objective"]
        assert columns == ("eps", "objective") and data.shape == (200, 2)
        assert np.max(data[:, 1]) <= outcome.result["alpha_tilde"] + 1e-9

    def test_pohozaev_harmonic(self):
        outcome = run_case(
            config("pohozaev", field="identity", solution="harmonic:n=3,k=2,i=0")
        )
        assert outcome.passed
        assert outcome.result["harmonic"]["passed"]
        assert outcome.result["pohozaev"]["n"] == 3

    def test_pohozaev_layered_and_ps(self):
        layered = run_case(config("pohozaev", field="layered:n=3,eps=0.5", solution="affine:1,0,0"))
        assert layered.passed and layered.result["pohozaev"]["err_sign"] == 1
        ps = run_case(config("pohozaev", field="ps2d:1,4", solution="ps2d"))
        assert ps.passed
        assert ps.result["tolerance"] == pytest.approx(1e-4)

    def test_pohozaev_fails_off_solutions(self):
        outcome = run_case(config("pohozaev", field="identity", solution="norm2"))
        assert not outcome.passed
        assert not outcome.result["hypothesis"]["passed"]

    def test_monotonicity_ps_pair(self):
        outcome = run_case(config("monotonicity", field="ps2d:1,4", solution="ps2d"))
        assert outcome.passed
        assert outcome.result["verdict"]["equality"]
        assert outcome.result["estimate_2d"]["passed"]
        assert outcome.result["exponents"]["alpha_osc"] == pytest.approx(0.5, abs=0.02)
        assert set(outcome.plots) == {"ratio", "decay"}
        assert "err_corrected" in outcome.result
        check = outcome.result["exponent_check"]
        assert check["passed"] and check["alpha"] == pytest.approx(0.5)
        assert check["osc_gap"] <= 0.02 and check["discrepancy"] <= 0.05

    def test_monotonicity_fails_when_fit_misses_exact_exponent(self, monkeypatch):
        monkeypatch.setattr(
            suite, "settings", dataclasses.replace(suite.settings, OSC_EXPONENT_TOL=-1.0)
        )
        outcome = run_case(config("monotonicity", field="ps2d:1,4", solution="ps2d"))
        assert outcome.result["verdict"]["passed"]
        assert not outcome.result["exponent_check"]["passed"]
        assert not outcome.passed

    def test_monotonicity_infers_dimension_from_solution(self):
        outcome = run_case(
            config("monotonicity", field="identity", solution="harmonic:n=3,k=1,i=0")
        )
        assert outcome.passed
        assert outcome.result["alpha_tilde"] == pytest.approx(3.0)

    def test_short_ladder_skips_fits(self):
        outcome = run_case(
            config("monotonicity", field="identity", solution="affine", ladder="0.5,1")
        )
        assert outcome.passed
        assert "exponents" not in outcome.result

    def test_monotonicity_on_grid_solution(self):
        outcome = run_case(
            config("monotonicity", field="identity", boundary="cos(theta)", nr=16, ntheta=32)
        )
        assert outcome.result["solver"]["grid"]["nr"] == 16
        assert not outcome.result["hypothesis"]["applicable"]
        assert "alpha_osc" not in (outcome.result.get("exponents") or {}) or (
            outcome.result["exponents"]["alpha_osc"] is None
        )

    def test_convergence_reports_against_harmonic_extension(self):
        outcome = run_case(
            config("convergence", field="identity", boundary="cos(2*theta)", nr=8, ntheta=16)
        )
        assert outcome.result["reference"] == "analytic"
        assert len(outcome.result["errors"]) == 3
        assert outcome.result["expected_order"] == 2.0

    def test_poincare_and_naive(self):
        assert run_case(config("poincare", solution="affine:1,0,0")).passed
        assert run_case(config("poincare", solution="harmonic:n=3,k=3,i=2")).passed
        drawn = run_case(config("poincare", solution="random:n=2,k=3", seed=5))
        assert drawn.passed
        naive = run_case(config("naive", n=7))
        assert naive.passed and naive.result["chain_fails"]

    def test_unknown_command(self):
        with pytest.raises(SpecError):
            run_case(config("launch"))

    def test_dimension_mismatch_between_field_and_solution(self):
        outcome = execute_case(config("pohozaev", field="identity:n=2", solution="affine:1,0,0"))
        assert not outcome.passed
        assert outcome.error.startswith("DimensionMismatchError")


class TestBatches:
    def test_case_without_count_is_kept(self):
        case = config("naive", n=7)
        assert expand_case(case) == [case]

    def test_children_are_named_and_reproducible(self):
        batch = config("poincare", name="trace", solution="random:n=2,k=3", count=12, seed=5)
        children = expand_case(batch)
        assert [c.name for c in children[:2]] == ["trace-01", "trace-02"]
        assert children[-1].name == "trace-12"
        assert all(c.count is None for c in children)
        assert len({c.seed for c in children}) == 12
        assert [c.seed for c in expand_case(batch)] == [c.seed for c in children]

    def test_exponent_children_draw_bounds(self):
        children = expand_case(config("exponent", count=40, seed=1))
        low, high = suite.BATCH_DIMENSIONS
        assert all(low <= c.n <= high for c in children)
        assert all(0 < c.lam <= c.Lam for c in children)
        assert all(suite.BATCH_LAMBDA_RANGE[0] <= c.Lam <= suite.BATCH_LAMBDA_RANGE[1] for c in children)
        assert len({c.Lam for c in children}) == 40

    def test_given_dimension_is_kept(self):
        children = expand_case(config("optimize", n=3, count=5, seed=2))
        assert {c.n for c in children} == {3}

    def test_other_commands_do_not_draw_bounds(self):
        children = expand_case(config("monotonicity", field="const:random", boundary="cos(theta)", count=3))
        assert all(c.lam is None and c.Lam is None and c.n is None for c in children)

    def test_non_positive_count(self):
        with pytest.raises(SpecError, match="count"):
            expand_case(config("exponent", count=0))

    def test_runner_expands_batches(self):
        result = SuiteRunner().run([config("exponent", name="pairs", count=6, seed=4), config("naive", n=8)])
        assert [o.name for o in result.outcomes][:2] == ["pairs-1", "pairs-2"]
        assert len(result.outcomes) == 7
        assert result.passed


class TestSuiteRunner:
    def test_outcomes_follow_manifest_order(self):
        configs = [config("naive", name=f"naive-{n}", n=n) for n in range(3, 11)]
        seen = []
        result = SuiteRunner(max_workers=4).run(configs, seen.append)
        assert [outcome.name for outcome in result.outcomes] == [c.name for c in configs]
        assert result.passed
        assert seen[0].current == 0 and seen[-1].current == len(configs)
        assert "8" in result.summary

    def test_failures_are_recorded_not_raised(self):
        configs = [
            config("exponent", name="ok", n=2, lam=1.0, Lam=4.0),
            config("exponent", name="missing", n=2),
            config("pohozaev", name="norm2", field="identity", solution="norm2"),
        ]
        result = SuiteRunner(max_workers=2).run(configs)
        assert not result.passed
        assert result.failed == ["missing", "norm2"]
        payload = result.to_dict()
        assert payload["total"] == 3
        assert payload["cases"][1]["error"].startswith("SpecError")
        assert payload["cases"][2]["error"] is None

    def test_unexpected_exceptions_become_failures(self, monkeypatch):
        def broken(_config):
            raise RuntimeError("boom")

        monkeypatch.setitem(suite.RUNNERS, "naive", broken)
        result = SuiteRunner(max_workers=1).run([config("naive", n=3)])
        assert result.outcomes[0].error == "RuntimeError: boom"

    def test_empty_suite(self):
        result = SuiteRunner().run([])
        assert result.passed
        assert result.to_dict()["total"] == 0


class TestExport:
    def test_outcome_files(self, tmp_path):
        outcome = run_case(config("monotonicity", name="ps", field="ps2d:1,4", solution="ps2d"))
        paths = export_outcome(outcome, ReportExporter(tmp_path))
        names = sorted(path.name for path in paths)
        assert names == ["ps.json", "ps_decay.dat", "ps_ratio.dat"]
        assert (tmp_path / "ps_ratio.dat").read_text(encoding="utf-8").startswith("# r ratio\n")
        report = json.loads((tmp_path / "ps.json").read_text(encoding="utf-8"))
        assert report["schema"] == "1" and report["passed"] is True

    def test_sweep_table_export(self, tmp_path):
        outcome = run_case(config("exponent", name="grid", sweep="n=2..3,ratio=0.5..1x2"))
        paths = export_outcome(outcome, ReportExporter(tmp_path), table_format="xlsx")
        assert any(path.name == "grid_sweep.xlsx" for path in paths)

    def test_summary(self, tmp_path):
        result = SuiteResult([CaseOutcome(config("naive", name="a", n=3), True)])
        path = export_suite(result, ReportExporter(tmp_path))
        summary = json.loads(path.read_text(encoding="utf-8"))
        assert summary["passed"] is True and summary["total"] == 1


@pytest.mark.slow
def test_bundled_suite_passes():
    cases = ManifestLoader().load("paper-suite")
    result = SuiteRunner().run([RunConfig.from_mapping(case) for case in cases])
    expected = sum(case.get("count", 1) for case in cases)
    assert len(result.outcomes) == expected
    failed = [o.config.label for o in result.outcomes if o.error is not None or not o.passed]
    assert result.passed and not failed, failed
    commands = {o.config.command for o in result.outcomes}
    assert commands == {"exponent", "optimize", "pohozaev", "monotonicity", "convergence", "poincare", "naive"}
