"""End-to-end CLI tests driven through dispatch()."""

import json

import numpy as np
import pytest

from fastfish.cli import dispatch
from fastfish.results import read_results


def run_cli(*argv):
    return dispatch([str(a) for a in argv])


@pytest.fixture()
def synth_file(tmp_path):
    out = tmp_path / "pool.dalb"
    code = run_cli(
        "synth", "--out", out, "--n", 120, "--d", 4, "--k", 3,
        "--sep", 2.0, "--noise", 0.1, "--seed", 5,
    )
    assert code == 0
    return out


@pytest.fixture()
def experiment_config(tmp_path):
    train, test = tmp_path / "train.dalb", tmp_path / "test.dalb"
    assert run_cli(
        "synth", "--out", train, "--test-out", test, "--n", 200, "--d", 4, "--k", 3,
        "--sep", 2.5, "--seed", 1,
    ) == 0

    def write(strategy_name, name):
        cfg = tmp_path / f"{name}.yaml"
        cfg.write_text(
            "\n".join(
                [
                    "dataset:",
                    f"  train: {train}",
                    f"  test: {test}",
                    "strategy:",
                    f"  name: {strategy_name}",
                    "al:",
                    "  initial_labeled: 10",
                    "  acquisition_size: 5",
                    "  total_budget: 20",
                    "  seeds: [0, 1]",
                    "classifier:",
                    "  epochs: 3",
                    "  batch_size: 32",
                    "  learning_rate: 0.05",
                ]
            )
        )
        return cfg

    return tmp_path, write


class TestSynthInspect:
    def test_inspect_round_trip(self, synth_file, capsys):
        assert run_cli("inspect", synth_file) == 0
        out = capsys.readouterr().out
        assert "n: 120" in out
        assert "d: 4" in out
        assert "k: 3" in out
        meta = json.loads(out.split("metadata: ", 1)[1])
        assert meta["params"]["seed"] == 5
        assert meta["params"]["label_noise"] == 0.1

    def test_split_outputs(self, tmp_path, capsys):
        train, test = tmp_path / "tr.dalb", tmp_path / "te.dalb"
        assert run_cli(
            "synth", "--out", train, "--test-out", test, "--n", 100, "--d", 3, "--k", 2,
            "--seed", 0,
        ) == 0
        assert run_cli("inspect", train) == 0
        assert "n: 50" in capsys.readouterr().out
        assert run_cli("inspect", test) == 0
        assert "n: 50" in capsys.readouterr().out


class TestRun:
    def test_run_twice_identical_except_timing(self, experiment_config):
        tmp_path, write = experiment_config
        cfg = write("margin", "margin")
        out_a, out_b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert run_cli("run", "--config", cfg, "--out", out_a) == 0
        assert run_cli("run", "--config", cfg, "--out", out_b) == 0

        def normalized(path):
            lines = []
            for line in path.read_text().splitlines():
                doc = json.loads(line)
                doc.pop("acquisition_seconds", None)
                lines.append(json.dumps(doc, sort_keys=True))
            return lines

        assert normalized(out_a) == normalized(out_b)
        # Only the timing field may differ byte-wise.
        raw_a = [json.loads(line) for line in out_a.read_text().splitlines()]
        raw_b = [json.loads(line) for line in out_b.read_text().splitlines()]
        for da, db in zip(raw_a, raw_b):
            keys = {k for k in da if da[k] != db[k]}
            assert keys <= {"acquisition_seconds"}

    def test_missing_config_exits_one(self, tmp_path, capsys):
        code = run_cli("run", "--config", tmp_path / "nope.yaml", "--out", tmp_path / "o")
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error: ")
        assert len(err.strip().splitlines()) == 1


class TestReport:
    def test_report_with_baseline(self, experiment_config, capsys):
        tmp_path, write = experiment_config
        paths = []
        for name in ("random", "margin"):
            out = tmp_path / f"{name}.jsonl"
            assert run_cli("run", "--config", write(name, name), "--out", out) == 0
            paths.append(out)
        summary_path = tmp_path / "summary.csv"
        assert run_cli("report", "--inputs", *paths, "--out", summary_path) == 0
        table = summary_path.read_text()
        stdout = capsys.readouterr().out
        assert table in stdout or stdout in table  # table echoed on stdout
        random_row = [line for line in table.splitlines() if line.startswith("random,")][0]
        assert random_row.split(",")[3] == "0.00"
        curves = (tmp_path / "summary.curves.csv").read_text()
        assert curves.splitlines()[0].startswith("strategy,labeled_count")

    def test_incompatible_inputs_fail_atomically(self, experiment_config, tmp_path):
        base, write = experiment_config
        cfg = write("random", "rand2")
        out_a = base / "ra.jsonl"
        assert run_cli("run", "--config", cfg, "--out", out_a) == 0
        # Second run under a different protocol (different budget).
        text = cfg.read_text().replace("total_budget: 20", "total_budget: 15")
        cfg2 = base / "rand3.yaml"
        cfg2.write_text(text)
        out_b = base / "rb.jsonl"
        assert run_cli("run", "--config", cfg2, "--out", out_b) == 0
        target = base / "broken_summary.csv"
        assert run_cli("report", "--inputs", out_a, out_b, "--out", target) == 1
        assert not target.exists()


class TestBenchCli:
    def test_bench_fim_csv(self, tmp_path):
        out = tmp_path / "bench.csv"
        assert run_cli(
            "bench-fim", "--d", 4, "--k", "3,5", "--kinds", "binary,topc:2",
            "--reps", 1, "--n", 20, "--out", out,
        ) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 5


class TestUsage:
    def test_unknown_flag_exit_two(self):
        assert run_cli("synth", "--frobnicate", "1") == 2

    def test_unknown_command_exit_two(self):
        assert run_cli("mystery") == 2

    def test_results_round_trip_readable(self, experiment_config):
        tmp_path, write = experiment_config
        out = tmp_path / "m.jsonl"
        assert run_cli("run", "--config", write("margin", "m"), "--out", out) == 0
        header, records = read_results(out)
        assert header["strategy"] == "margin"
        assert all(r.strategy == "margin" for r in records)

    def test_threads_env_fallback(self, experiment_config, monkeypatch):
        tmp_path, write = experiment_config
        monkeypatch.setenv("FASTFISH_THREADS", "2")
        out = tmp_path / "env.jsonl"
        assert run_cli("run", "--config", write("random", "env"), "--out", out) == 0
        monkeypatch.setenv("FASTFISH_THREADS", "zippy")
        assert run_cli("run", "--config", write("random", "env2"), "--out", tmp_path / "e2") == 1

    def test_single_thread_matches_parallel(self, experiment_config):
        tmp_path, write = experiment_config
        cfg = write("margin", "serial")
        serial, parallel = tmp_path / "serial.jsonl", tmp_path / "parallel.jsonl"
        assert run_cli("--threads", 1, "run", "--config", cfg, "--out", serial) == 0
        assert run_cli("--threads", 2, "run", "--config", cfg, "--out", parallel) == 0

        def strip_timing(path):
            docs = [json.loads(line) for line in path.read_text().splitlines()]
            for doc in docs:
                doc.pop("acquisition_seconds", None)
            return docs

        assert strip_timing(serial) == strip_timing(parallel)
