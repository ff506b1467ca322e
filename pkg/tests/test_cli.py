import json
from pathlib import Path

import pytest

from anytime_eval.cli import cli_main

from conftest import FIXTURES


def write_config(tmp_path, run_id, method="base", extra="") -> Path:
    dataset = FIXTURES / "replay" / "trip_small.jsonl"
    config = tmp_path / "run.toml"
    config.write_text(
        f'run_id = "{run_id}"\n'
        f'out_dir = "{tmp_path / "runs"}"\n'
        f'method = "{method}"\n'
        "\n[dataset]\n"
        'kind = "trip"\n'
        f'path = "{dataset}"\n'
        "\n[sampling]\n"
        "n_traces = 3\n"
        "seed = 0\n"
        "\n[endpoint]\n"
        'model = "scripted-demo"\n'
        'base_url = "replay://bundled"\n'
        + extra,
        encoding="utf-8",
    )
    return config


@pytest.fixture()
def replay_arg(replay_store_path):
    return str(replay_store_path)


class TestCheck:
    def test_outcomes_and_csr_on_stdout(self, tmp_path, capsys, trip_corpus):
        case = next(c for c in trip_corpus if c["tags"] == "reference-valid")
        query = tmp_path / "q.txt"
        plan = tmp_path / "p.txt"
        query.write_text(case["query_text"], encoding="utf-8")
        plan.write_text(case["plan_text"], encoding="utf-8")
        code = cli_main(["check", "--query", str(query), "--plan", str(plan)])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["csr"] == 1.0
        assert out["total"] == 16
        assert all(o["satisfied"] for o in out["outcomes"])

    def test_failing_plan_reports_details(self, tmp_path, capsys, trip_corpus):
        case = next(c for c in trip_corpus if c["tags"] == "reference-valid")
        query = tmp_path / "q.txt"
        plan = tmp_path / "p.txt"
        query.write_text(case["query_text"], encoding="utf-8")
        plan.write_text("Day 1-18: Tallinn.", encoding="utf-8")
        assert cli_main(["check", "--query", str(query), "--plan", str(plan)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["csr"] < 1.0
        assert any(not o["satisfied"] for o in out["outcomes"])


class TestUsageErrors:
    def test_unknown_subcommand_exits_2(self, capsys):
        assert cli_main(["frobnicate"]) == 2

    def test_unknown_flag_exits_2(self, capsys):
        assert cli_main(["check", "--nope"]) == 2

    def test_no_arguments_exits_2(self, capsys):
        assert cli_main([]) == 2

    def test_missing_config_file_is_reported(self, tmp_path, capsys):
        assert cli_main(["evaluate", "--config", str(tmp_path / "absent.toml")]) == 1


class TestEvaluate:
    def test_offline_replay_writes_summary(self, tmp_path, capsys, replay_arg):
        config = write_config(tmp_path, "cli-eval")
        code = cli_main(["evaluate", "--config", str(config), "--replay", replay_arg])
        assert code == 0
        summary_path = tmp_path / "runs" / "cli-eval" / "summary.json"
        assert summary_path.exists()
        printed = json.loads(capsys.readouterr().out)
        assert printed["cells_ok"] == 48
        assert printed["run_id"] == "cli-eval"

    def test_resume_flag(self, tmp_path, capsys, replay_arg):
        config = write_config(tmp_path, "cli-resume")
        assert cli_main(["evaluate", "--config", str(config), "--replay", replay_arg]) == 0
        assert cli_main(["evaluate", "--config", str(config), "--replay", replay_arg,
                         "--resume"]) == 0


class TestPrefgenAndReport:
    def test_prefgen_then_report(self, tmp_path, capsys, replay_arg):
        extra = (
            "\n[prefgen]\n"
            "n_traces = 4\n"
            f'seed_examples = "{FIXTURES / "replay" / "trip_small.jsonl"}"\n'
            "max_pairs = 8\n"
        )
        config = write_config(tmp_path, "record", extra=extra)
        # run_id "record" makes the prefgen run id "record-prefgen", matching
        # the bundled fixture flows.
        assert cli_main(["prefgen", "--config", str(config), "--replay", replay_arg]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["n_pairs"] >= 1
        assert Path(printed["pairs_file"]).exists()

        assert cli_main(["evaluate", "--config", str(config), "--replay", replay_arg]) == 0
        capsys.readouterr()
        assert cli_main(["report", "--runs", str(tmp_path / "runs"),
                         "--out", str(tmp_path / "report")]) == 0
        out = capsys.readouterr().out
        assert "Overall:Final" in out
        assert (tmp_path / "report" / "report.csv").exists()
        assert (tmp_path / "report" / "curve_trip.csv").exists()

    def test_report_on_empty_dir_fails(self, tmp_path, capsys):
        assert cli_main(["report", "--runs", str(tmp_path)]) == 1
