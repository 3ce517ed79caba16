"""
Tests for the bornlens command line
"""

import pytest

from bornlens.base_study import StudyReport
from bornlens.cli import build_parser, parse_and_dispatch
from bornlens.config import GravitySpec
from bornlens.exceptions import StudyException
from bornlens.orchestrator import BornLensOrchestrator, RunResult
from bornlens.validation import CheckResult


def fake_result(tmp_path) -> RunResult:
    report = StudyReport(
        scenario="gravity", spec={}, spec_hash="0" * 64, master_seed=42,
        points=[{"h": 1.5, "raw_norm": 0.99, "errors": {"tau_q": "FitFailure: no data"}}],
    )
    return RunResult(report=report, output_dir=tmp_path)


class TestParser:
    """Tests for the argument parser"""

    def test_every_verb_has_a_subcommand(self):
        """Study verbs and validate parse"""
        parser = build_parser()
        for verb in ["barrier", "double-slit", "gravity", "oscillator", "superposition", "validate"]:
            assert parser.parse_args([verb]).command == verb

    def test_repeatable_set(self):
        """--set accumulates overrides"""
        args = build_parser().parse_args(["gravity", "--set", "h=1.5", "--set", "n=2000", "--seed", "3"])
        assert args.overrides == ["h=1.5", "n=2000"]
        assert args.seed == 3


class TestDispatch:
    """Tests for parse_and_dispatch exit codes"""

    def test_no_command(self, capsys):
        """No verb prints help and exits 2"""
        assert parse_and_dispatch([]) == 2
        assert "bornlens" in capsys.readouterr().out

    def test_unknown_verb(self):
        """argparse usage errors exit 2"""
        assert parse_and_dispatch(["triple-slit"]) == 2

    def test_negative_threads(self, capsys):
        """A negative thread count is a configuration error"""
        assert parse_and_dispatch(["gravity", "--threads", "-1"]) == 2
        assert "--threads" in capsys.readouterr().err

    def test_missing_config(self, capsys):
        """A missing config file exits 2 and names the path"""
        assert parse_and_dispatch(["gravity", "--config", "missing.json"]) == 2
        assert "missing.json" in capsys.readouterr().err

    def test_bad_override(self):
        """An unknown key exits 2"""
        assert parse_and_dispatch(["double-slit", "--set", "nonsense=1"]) == 2

    def test_study_runs(self, mocker, tmp_path):
        """A resolved spec reaches the orchestrator and the run exits 0"""
        run = mocker.patch.object(BornLensOrchestrator, "run", return_value=fake_result(tmp_path))
        code = parse_and_dispatch(["gravity", "--set", "h=1.5", "--seed", "42", "--out", str(tmp_path)])
        assert code == 0
        verb, spec = run.call_args.args
        assert verb == "gravity"
        assert isinstance(spec, GravitySpec)
        assert spec.h == [1.5]
        assert spec.master_seed == 42
        assert run.call_args.kwargs["output_dir"] == str(tmp_path)

    def test_study_error(self, mocker, capsys):
        """A study failure exits 1"""
        mocker.patch.object(BornLensOrchestrator, "run", side_effect=StudyException("boom"))
        assert parse_and_dispatch(["gravity", "--set", "h=1.5"]) == 1
        assert "boom" in capsys.readouterr().err

    def test_validate_passes(self, mocker):
        """validate exits 0 when every check passes"""
        mocker.patch("bornlens.cli.run_validation_suite", return_value=[CheckResult("a", True, "ok")])
        assert parse_and_dispatch(["validate"]) == 0

    def test_validate_fails(self, mocker):
        """validate exits 1 when any check fails"""
        mocker.patch(
            "bornlens.cli.run_validation_suite",
            return_value=[CheckResult("a", True, "ok"), CheckResult("b", False, "off by 1")],
        )
        assert parse_and_dispatch(["validate"]) == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
