"""Smoke tests for the timing micro-benchmark (full thresholds live in acceptance)."""

import pytest

from fastfish.bench import bench_fim, rows_to_csv
from fastfish.exceptions import InvalidInputError


def test_rows_well_formed():
    rows = bench_fim(6, [3, 5], 40, ["exact", "topc:2", "binary", "diag"], 2)
    # topc:2 runs at both K values since c <= K everywhere.
    assert len(rows) == 8
    for row in rows:
        assert row.fim_seconds > 0
        assert row.score_seconds > 0
        assert row.d == 6 and row.n == 40 and row.reps == 2
        assert row.backend in ("py", "ext")


def test_topc_skipped_when_wider_than_k():
    rows = bench_fim(4, [2], 10, ["topc:3", "binary"], 1)
    assert [r.kind for r in rows] == ["binary"]


def test_csv_render():
    rows = bench_fim(4, [3], 10, ["binary"], 1)
    csv = rows_to_csv(rows)
    lines = csv.strip().splitlines()
    assert lines[0].startswith("kind,k,d,n,reps")
    assert lines[1].startswith("binary,3,4,10,1,")


def test_backend_parameter(py_and_ext):
    for backend in py_and_ext:
        rows = bench_fim(4, [3], 10, ["binary"], 1, backend=backend)
        assert rows[0].backend == backend


def test_bad_sizes_rejected():
    with pytest.raises(InvalidInputError):
        bench_fim(0, [3], 10, ["binary"], 1)
    with pytest.raises(InvalidInputError):
        bench_fim(4, [1], 10, ["binary"], 1)
