import csv
import json
import subprocess
import sys

import pytest

from platekit.cli import main


def run_cli(*args):
    return main(list(args))


class TestValidateTask:
    @pytest.mark.parametrize("name", ["taro", "shrimp"])
    def test_shipped_tasks_validate(self, capsys, name):
        assert run_cli("validate-task", "--task", name) == 0
        assert "OK" in capsys.readouterr().out


class TestPlan:
    def test_emits_parseable_record(self, capsys):
        code = run_cli(
            "plan", "--task", "taro", "--w", "0.5",
            "--population", "24", "--iterations", "4",
        )
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["grid_index"] == 10
        assert record["best_cost"] >= 0
        assert len(record["best_actions"]) == 1

    def test_wrong_dimension_fails(self, capsys):
        assert run_cli("plan", "--task", "taro", "--w", "0.5,0.5") == 2


class TestSimulate:
    def test_row_count_arithmetic(self, tmp_path):
        code = run_cli(
            "simulate", "--task", "taro", "--users", "taro",
            "--trials", "2", "--n-queries", "5", "--seed", "1",
            "--population", "24", "--iterations", "3",
            "--out", str(tmp_path),
        )
        assert code == 0
        with open(tmp_path / "taro_simulate.csv") as fh:
            rows = list(csv.DictReader(fh))
        # 3 users x 2 trials x 2 methods x 5 queries
        assert len(rows) == 3 * 2 * 2 * 5
        assert {r["method"] for r in rows} == {"pcpbo", "naive"}
        assert all(r["task"] == "taro" for r in rows)
        assert {r["user"] for r in rows} == {"taro_low", "taro_mid", "taro_high"}

    def test_byte_identical_reruns(self, tmp_path):
        args = (
            "simulate", "--task", "taro", "--users", "taro",
            "--trials", "1", "--n-queries", "4", "--seed", "9",
            "--population", "24", "--iterations", "3",
        )
        run_cli(*args, "--out", str(tmp_path / "a"))
        run_cli(*args, "--out", str(tmp_path / "b"))
        a = (tmp_path / "a" / "taro_simulate.csv").read_bytes()
        b = (tmp_path / "b" / "taro_simulate.csv").read_bytes()
        assert a == b


class TestPrecompute:
    def test_fills_cache_records(self, tmp_path):
        code = run_cli(
            "precompute", "--task", "taro", "--restarts", "2", "--seed", "0",
            "--population", "24", "--iterations", "2",
            "--out", str(tmp_path / "cache"),
        )
        assert code == 0
        files = sorted((tmp_path / "cache" / "taro").glob("*.json"))
        assert len(files) == 21 * 2  # one record per (w, seed)


class TestEntryPoint:
    def test_module_invocation(self):
        out = subprocess.run(
            [sys.executable, "-m", "platekit.cli", "validate-task", "--task", "taro"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
