import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from consensus_lab import __version__
from consensus_lab.cli import main

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def runner():
    return CliRunner()


def _summary(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))["summary"]


class TestMain:
    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_list_algorithms(self, runner):
        result = runner.invoke(main, ["list-algorithms"])
        assert result.exit_code == 0
        assert "Available algorithms:" in result.output
        for name in ("midpoint", "thirds", "amortized-midpoint", "mass-split", "minrelay"):
            assert f"* {name} " in result.output


class TestAnalyze:
    def test_two_agent_model(self, runner):
        result = runner.invoke(main, ["analyze", "--model", str(SAMPLES / "two_agent.json")])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["n"] == 2
        assert report["graphs"] == 3
        assert report["consensus_solvable"] is False
        assert report["alpha_diameter"] == 2

    def test_writes_file_with_out_dir(self, runner, tmp_path):
        result = runner.invoke(
            main, ["analyze", "--model", str(SAMPLES / "k3.json"), "--out-dir", str(tmp_path)]
        )
        assert result.exit_code == 0
        assert _summary(tmp_path / "analyze.json")["consensus_solvable"] is True

    def test_missing_model_file(self, runner, tmp_path):
        result = runner.invoke(main, ["analyze", "--model", str(tmp_path / "nope.json")])
        assert result.exit_code == 2
        assert "Cannot read model file" in result.output


class TestSimulate:
    def test_constant_pattern(self, runner, tmp_path):
        args = [
            "simulate", "--model", str(SAMPLES / "k3.json"), "--initial", "0,1,1/2",
            "--rounds", "2", "--out-dir", str(tmp_path),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        assert "Final Δ: 0" in result.output
        data = json.loads((tmp_path / "simulate.json").read_text(encoding="utf-8"))
        assert [row["delta"] for row in data["rows"]] == [1.0, 0.0, 0.0]
        assert data["summary"]["pattern"] == "constant"

    def test_missing_initial(self, runner):
        result = runner.invoke(main, ["simulate", "--model", str(SAMPLES / "k3.json")])
        assert result.exit_code == 2
        assert "initial" in result.output


class TestAdversary:
    def test_greedy_csv(self, runner, tmp_path):
        args = [
            "adversary", "--model", str(SAMPLES / "deaf_k3.json"), "--algorithm", "midpoint",
            "--initial", "1,0,0", "--rounds", "4", "--out-dir", str(tmp_path), "--format", "csv",
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        assert "δ_lb at round 4" in result.output
        lines = (tmp_path / "adversary.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("round,graph_id,y1,y2,y3,delta")
        assert len(lines) == 6
        summary = _summary(tmp_path / "adversary_summary.json")
        assert summary["final_delta"] == pytest.approx(1 / 16)
        assert summary["adversary"] == "greedy"

    def test_greedy_staircase_start(self, runner, tmp_path):
        args = [
            "adversary", "--model", str(SAMPLES / "deaf_k3.json"), "--rounds", "2",
            "--out-dir", str(tmp_path),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        assert _summary(tmp_path / "adversary.json")["initial_delta"] == 1.0

    def test_greedy_sampling_needs_seed(self, runner):
        args = [
            "adversary", "--model", str(SAMPLES / "deaf_k3.json"), "--rounds", "1",
            "--depth", "2", "--branching-cap", "4",
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 2
        assert "--seed" in result.output

    def test_greedy_sampling_with_seed(self, runner, tmp_path):
        args = [
            "adversary", "--model", str(SAMPLES / "deaf_k3.json"), "--initial", "1,0,0",
            "--rounds", "1", "--depth", "2", "--branching-cap", "4", "--seed", "5",
            "--out-dir", str(tmp_path),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output

    def test_config_file(self, runner, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text(
            f"model: {SAMPLES / 'deaf_k3.json'}\ninitial: \"1,0,0\"\nrounds: 12\n"
            f"out-dir: {tmp_path / 'out'}\nformat: csv\n",
            encoding="utf-8",
        )
        result = runner.invoke(main, ["--config", str(config), "adversary", "--rounds", "2"])
        assert result.exit_code == 0, result.output
        assert len((tmp_path / "out" / "adversary.csv").read_text(encoding="utf-8").splitlines()) == 4

    def test_unknown_config_key(self, runner, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("colour: blue\n", encoding="utf-8")
        result = runner.invoke(main, ["--config", str(config), "adversary"])
        assert result.exit_code == 2
        assert "colour" in result.output


class TestAsync:
    def test_minrelay_worst_case(self, runner, tmp_path):
        args = [
            "async", "--n", "4", "--f", "2", "--algorithm", "minrelay",
            "--delays", "worst-case", "--out-dir", str(tmp_path),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        summary = _summary(tmp_path / "async.json")
        assert summary["agreement_time"] == pytest.approx(3.0)
        assert summary["agreed_by_f_plus_1"] is True
        assert len(summary["correct"]) == 2
        assert (tmp_path / "async_events.jsonl").exists()

    def test_round_wrapper(self, runner, tmp_path):
        args = [
            "async", "--algorithm", "round:midpoint", "--initial", "0,1,1/2", "--f", "1",
            "--rounds", "3", "--out-dir", str(tmp_path),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        summary = _summary(tmp_path / "async.json")
        assert summary["rounds"] == 3
        assert summary["induced_graphs"] >= 1
        assert (tmp_path / "async_pattern.json").exists()

    def test_round_wrapper_with_crash_schedule(self, runner, tmp_path):
        args = [
            "async", "--algorithm", "round:midpoint", "--initial", "0,1,1/2", "--f", "1",
            "--rounds", "3", "--schedule", str(SAMPLES / "worst_case_3_1.json"),
            "--out-dir", str(tmp_path),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        summary = _summary(tmp_path / "async.json")
        assert summary["rounds"] == 3
        assert summary["crashed"] == [1]

    def test_initial_length_must_match_n(self, runner):
        args = ["async", "--n", "4", "--f", "1", "--algorithm", "minrelay", "--initial", "0,1,2"]
        result = runner.invoke(main, args)
        assert result.exit_code == 2
        assert "--initial has 3 values" in result.output

    def test_round_algorithm_needs_prefix(self, runner):
        result = runner.invoke(main, ["async", "--n", "3", "--algorithm", "midpoint"])
        assert result.exit_code == 2
        assert "round:midpoint" in result.output

    def test_crash_budget(self, runner):
        result = runner.invoke(main, ["async", "--n", "3", "--f", "3", "--algorithm", "minrelay"])
        assert result.exit_code == 2


class TestApprox:
    def test_two_agent(self, runner, tmp_path):
        args = ["approx", "--regime", "two_agent", "--delta", "1", "--eps", "0.1", "--out-dir", str(tmp_path)]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        assert "T = 3, ε-agreement: True" in result.output
        summary = _summary(tmp_path / "approx.json")
        assert summary["agreement"]["exhaustive"] is True
        assert summary["agreement"]["patterns"] == 27

    def test_unknown_regime(self, runner):
        result = runner.invoke(main, ["approx", "--regime", "loose", "--delta", "1", "--eps", "0.1"])
        assert result.exit_code == 2
