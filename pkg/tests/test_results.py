"""Results-file round trips, aggregation, and summary tables."""

import numpy as np
import pytest

from fastfish.results import (
    CycleRecord,
    LearningCurve,
    curve_from_records,
    diff_to_baseline,
    make_header,
    read_results,
    summarize,
    write_results,
)
from fastfish.exceptions import AggregationError, FormatError, InvalidInputError


def record(strategy="random", seed=0, cycle=0, labeled=10, acc=0.5, secs=0.01, selected=(1, 2)):
    return CycleRecord(
        strategy=strategy,
        seed=seed,
        cycle=cycle,
        labeled_count=labeled,
        test_accuracy=acc,
        acquisition_seconds=secs,
        selected=tuple(selected),
    )


def fake_run(strategy, accs_by_seed, protocol="p0", config=None, batch=5):
    """Records for several seeds on a shared grid plus a header."""
    records = []
    for seed, accs in accs_by_seed.items():
        for cycle, acc in enumerate(accs):
            last = cycle == len(accs) - 1
            records.append(
                record(
                    strategy=strategy,
                    seed=seed,
                    cycle=cycle,
                    labeled=10 + batch * cycle,
                    acc=acc,
                    secs=0.0 if last else 0.5,
                    selected=() if last else tuple(range(batch)),
                )
            )
    header = make_header(
        config_hash=config or f"cfg-{strategy}", protocol_hash=protocol, strategy=strategy
    )
    return records, header


class TestRoundTrip:
    def test_single_record(self, tmp_path):
        rec = record(acc=0.875, secs=1.25)
        path = tmp_path / "r.jsonl"
        write_results([rec], path, make_header("c", "p", "random"))
        header, back = read_results(path)
        assert header["strategy"] == "random"
        assert back == [rec]

    def test_header_required(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text('{"kind": "record"}\n')
        with pytest.raises(FormatError):
            read_results(path)

    def test_empty_records_rejected(self, tmp_path):
        with pytest.raises(InvalidInputError):
            write_results([], tmp_path / "x.jsonl", make_header("c", "p", "s"))

    def test_version_gates_parsing(self, tmp_path):
        path = tmp_path / "future.jsonl"
        write_results([record()], path, make_header("c", "p", "random"))
        lines = path.read_text().splitlines()
        lines[0] = lines[0].replace('"version": 1', '"version": 99')
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="version"):
            read_results(path)


class TestCurves:
    def test_aggregation_matches_recomputation(self):
        accs = {0: [0.5, 0.6, 0.7], 1: [0.4, 0.65, 0.75], 2: [0.45, 0.6, 0.8]}
        records, _ = fake_run("margin", accs)
        by_seed = {}
        for rec in records:
            by_seed.setdefault(rec.seed, []).append(rec)
        curve = curve_from_records(by_seed)
        raw = np.array([accs[s] for s in sorted(accs)])
        np.testing.assert_allclose(curve.mean, raw.mean(axis=0), atol=1e-12)
        np.testing.assert_allclose(curve.std, raw.std(axis=0, ddof=1), atol=1e-12)
        assert curve.labeled_counts == (10, 15, 20)

    def test_grid_mismatch(self):
        a = LearningCurve((10, 20), (0.5, 0.6), (0.0, 0.0))
        b = LearningCurve((10, 30), (0.4, 0.5), (0.0, 0.0))
        with pytest.raises(AggregationError):
            diff_to_baseline(a, b)

    def test_difference_of_itself_is_zero(self):
        a = LearningCurve((10, 20), (0.5, 0.6), (0.01, 0.02))
        diff = diff_to_baseline(a, a)
        assert diff.mean == (0.0, 0.0)
        np.testing.assert_allclose(diff.std, np.sqrt(2) * np.array(a.std), atol=1e-15)

    def test_constant_offset(self):
        a = LearningCurve((10, 20), (0.52, 0.62), (0.0, 0.0))
        b = LearningCurve((10, 20), (0.50, 0.60), (0.0, 0.0))
        np.testing.assert_allclose(diff_to_baseline(a, b).mean, (0.02, 0.02), atol=1e-15)


class TestSummarize:
    def test_difference_against_random(self, tmp_path):
        rand_records, rand_header = fake_run("random", {0: [0.5, 0.6], 1: [0.5, 0.6]})
        bait_records, bait_header = fake_run("bait:binary", {0: [0.6, 0.7], 1: [0.6, 0.7]})
        p_rand, p_bait = tmp_path / "rand.jsonl", tmp_path / "bait.jsonl"
        write_results(rand_records, p_rand, rand_header)
        write_results(bait_records, p_bait, bait_header)
        summary = summarize([p_rand, p_bait])
        rows = {r.strategy: r for r in summary.rows}
        assert rows["random"].auc_diff_to_baseline == 0.0
        assert abs(rows["bait:binary"].auc_diff_to_baseline - 10.0) < 1e-9
        assert abs(rows["random"].auc_mean - 55.0) < 1e-9
        table = summary.table_csv()
        assert "strategy,auc_mean" in table.splitlines()[0]
        assert any(line.startswith("random,") for line in table.splitlines())

    def test_missing_baseline_degrades(self, tmp_path, caplog):
        records, header = fake_run("margin", {0: [0.5, 0.6]})
        path = tmp_path / "m.jsonl"
        write_results(records, path, header)
        with caplog.at_level("WARNING"):
            summary = summarize([path])
        assert summary.rows[0].auc_diff_to_baseline is None
        assert abs(summary.rows[0].auc_mean - 55.0) < 1e-9
        assert "baseline" in caplog.text

    def test_mixed_protocols_rejected(self, tmp_path):
        a_records, a_header = fake_run("random", {0: [0.5]}, protocol="p0")
        b_records, b_header = fake_run("margin", {0: [0.5]}, protocol="p1")
        pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_results(a_records, pa, a_header)
        write_results(b_records, pb, b_header)
        with pytest.raises(AggregationError):
            summarize([pa, pb])

    def test_conflicting_configs_same_strategy(self, tmp_path):
        a_records, a_header = fake_run("random", {0: [0.5]}, config="c1")
        b_records, b_header = fake_run("random", {1: [0.5]}, config="c2")
        pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_results(a_records, pa, a_header)
        write_results(b_records, pb, b_header)
        with pytest.raises(AggregationError):
            summarize([pa, pb])

    def test_acquisition_seconds_exclude_final_cycle(self, tmp_path):
        records, header = fake_run("random", {0: [0.5, 0.6, 0.7]})
        path = tmp_path / "r.jsonl"
        write_results(records, path, header)
        summary = summarize([path])
        assert abs(summary.rows[0].mean_acquisition_seconds - 0.5) < 1e-12

    def test_curves_csv_shape(self, tmp_path):
        rand_records, rand_header = fake_run("random", {0: [0.5, 0.6]})
        path = tmp_path / "rand.jsonl"
        write_results(rand_records, path, rand_header)
        csv = summarize([path]).curves_csv()
        lines = csv.strip().splitlines()
        assert lines[0].startswith("strategy,labeled_count")
        assert len(lines) == 3
