"""Line-delimited results files and cross-strategy summaries.

A results file is JSONL: one header object (config/protocol hashes, strategy,
format version) followed by one object per cycle record. Keys are sorted so
repeated runs of the same config produce byte-identical files except for the
``acquisition_seconds`` timing field.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .data import atomic_write_text
from .exceptions import AggregationError, FormatError, InvalidInputError

log = logging.getLogger(__name__)

RESULTS_VERSION = 1


@dataclass(frozen=True)
class CycleRecord:
    """One AL cycle: the model trained on ``labeled_count`` labels and what was picked next."""

    strategy: str
    seed: int
    cycle: int
    labeled_count: int
    test_accuracy: float
    acquisition_seconds: float
    selected: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "kind": "record",
            "strategy": self.strategy,
            "seed": self.seed,
            "cycle": self.cycle,
            "labeled_count": self.labeled_count,
            "test_accuracy": self.test_accuracy,
            "acquisition_seconds": self.acquisition_seconds,
            "selected": list(self.selected),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CycleRecord":
        return cls(
            strategy=doc["strategy"],
            seed=doc["seed"],
            cycle=doc["cycle"],
            labeled_count=doc["labeled_count"],
            test_accuracy=doc["test_accuracy"],
            acquisition_seconds=doc["acquisition_seconds"],
            selected=tuple(doc["selected"]),
        )


@dataclass(frozen=True)
class LearningCurve:
    """Accuracy against labels acquired, aggregated over seeds."""

    labeled_counts: tuple[int, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self):
        counts = self.labeled_counts
        if any(b <= a for a, b in zip(counts, counts[1:])):
            raise InvalidInputError("labeled counts must be strictly increasing")


def make_header(config_hash: str, protocol_hash: str, strategy: str) -> dict:
    return {
        "kind": "header",
        "version": RESULTS_VERSION,
        "config_hash": config_hash,
        "protocol_hash": protocol_hash,
        "strategy": strategy,
    }


def write_results(records, path, header: dict) -> None:
    """Write a header line plus one line per record (sorted keys, atomic)."""
    if not records:
        raise InvalidInputError("no records to write")
    if header.get("kind") != "header":
        raise InvalidInputError("header must carry kind='header'")
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(r.to_json(), sort_keys=True) for r in records]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_results(path) -> tuple[dict, list[CycleRecord]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise FormatError("results file is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"results header is not valid JSON: {exc}") from exc
    if header.get("kind") != "header":
        raise FormatError("first line must be the header")
    if header.get("version") != RESULTS_VERSION:
        raise FormatError(f"unsupported results version {header.get('version')}")
    records = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {i} is not valid JSON: {exc}") from exc
        if doc.get("kind") != "record":
            raise FormatError(f"line {i} is not a record")
        records.append(CycleRecord.from_json(doc))
    return header, records


def curve_from_records(records_by_seed: dict[int, list[CycleRecord]]) -> LearningCurve:
    """Mean/std accuracy over seeds on a shared labeled-count grid."""
    if not records_by_seed:
        raise AggregationError("no records to aggregate")
    grids = {tuple(r.labeled_count for r in recs) for recs in records_by_seed.values()}
    if len(grids) != 1:
        raise AggregationError(f"seeds disagree on labeled-count grids: {sorted(grids)}")
    (grid,) = grids
    acc = np.array(
        [[r.test_accuracy for r in recs] for recs in records_by_seed.values()], dtype=np.float64
    )
    ddof = 1 if acc.shape[0] > 1 else 0
    return LearningCurve(
        labeled_counts=grid,
        mean=tuple(float(v) for v in acc.mean(axis=0)),
        std=tuple(float(v) for v in acc.std(axis=0, ddof=ddof)),
    )


@dataclass(frozen=True)
class StrategySummary:
    strategy: str
    auc_mean: float  # percentage points
    auc_std: float
    auc_diff_to_baseline: float | None
    mean_acquisition_seconds: float
    n_seeds: int


@dataclass(frozen=True)
class Summary:
    rows: tuple[StrategySummary, ...]
    curves: dict[str, LearningCurve]
    diff_curves: dict[str, LearningCurve]
    baseline: str | None

    def table_csv(self) -> str:
        lines = ["strategy,auc_mean,auc_std,auc_diff_to_baseline,mean_acquisition_seconds,n_seeds"]
        for r in self.rows:
            diff = "" if r.auc_diff_to_baseline is None else f"{r.auc_diff_to_baseline:.2f}"
            lines.append(
                f"{r.strategy},{r.auc_mean:.2f},{r.auc_std:.2f},{diff},"
                f"{r.mean_acquisition_seconds:.4f},{r.n_seeds}"
            )
        return "\n".join(lines) + "\n"

    def curves_csv(self) -> str:
        lines = ["strategy,labeled_count,accuracy_mean,accuracy_std,diff_mean,diff_std"]
        for name, curve in self.curves.items():
            diff = self.diff_curves.get(name)
            for i, count in enumerate(curve.labeled_counts):
                diff_mean = f"{diff.mean[i]:.6f}" if diff is not None else ""
                diff_std = f"{diff.std[i]:.6f}" if diff is not None else ""
                lines.append(
                    f"{name},{count},{curve.mean[i]:.6f},{curve.std[i]:.6f},{diff_mean},{diff_std}"
                )
        return "\n".join(lines) + "\n"


def summarize(paths, baseline: str | None = "random") -> Summary:
    """Aggregate results files into per-strategy AUC and timing rows.

    All files must share the same experimental protocol. AUC is the mean
    accuracy across cycles, reported in percentage points and averaged over
    seeds; differences are taken against the baseline strategy when present
    (its own difference is zero).
    """
    if not paths:
        raise InvalidInputError("no result files given")
    by_strategy: dict[str, dict[int, list[CycleRecord]]] = {}
    hashes: dict[str, str] = {}
    protocol = None
    for path in paths:
        header, records = read_results(path)
        if protocol is None:
            protocol = header["protocol_hash"]
        elif header["protocol_hash"] != protocol:
            raise AggregationError(f"{path} was produced under a different protocol")
        name = header["strategy"]
        if name in hashes and hashes[name] != header["config_hash"]:
            raise AggregationError(f"conflicting configs for strategy {name!r}")
        hashes[name] = header["config_hash"]
        bucket = by_strategy.setdefault(name, {})
        for rec in records:
            bucket.setdefault(rec.seed, []).append(rec)

    curves = {name: curve_from_records(recs) for name, recs in by_strategy.items()}
    baseline_curve = curves.get(baseline) if baseline else None
    baseline_aucs = None
    if baseline and baseline not in by_strategy:
        log.warning("baseline strategy %r missing; difference columns left empty", baseline)

    def seed_aucs(recs_by_seed) -> np.ndarray:
        return np.array(
            [100.0 * np.mean([r.test_accuracy for r in recs]) for recs in recs_by_seed.values()]
        )

    if baseline_curve is not None:
        baseline_aucs = seed_aucs(by_strategy[baseline])

    rows = []
    diff_curves: dict[str, LearningCurve] = {}
    for name in sorted(by_strategy):
        recs_by_seed = by_strategy[name]
        aucs = seed_aucs(recs_by_seed)
        acq = [
            r.acquisition_seconds
            for recs in recs_by_seed.values()
            for r in recs
            if r.selected
        ]
        diff = None
        if baseline_aucs is not None:
            diff = float(aucs.mean() - baseline_aucs.mean())
            diff_curves[name] = diff_to_baseline(curves[name], curves[baseline])
        ddof = 1 if len(aucs) > 1 else 0
        rows.append(
            StrategySummary(
                strategy=name,
                auc_mean=float(aucs.mean()),
                auc_std=float(aucs.std(ddof=ddof)),
                auc_diff_to_baseline=diff,
                mean_acquisition_seconds=float(np.mean(acq)) if acq else 0.0,
                n_seeds=len(recs_by_seed),
            )
        )
    return Summary(rows=tuple(rows), curves=curves, diff_curves=diff_curves, baseline=baseline)


def diff_to_baseline(curve: LearningCurve, baseline: LearningCurve) -> LearningCurve:
    """Pointwise curve difference with standard deviations combined in quadrature."""
    if curve.labeled_counts != baseline.labeled_counts:
        raise AggregationError("curves are on different labeled-count grids")
    mean = tuple(a - b for a, b in zip(curve.mean, baseline.mean))
    std = tuple(math.sqrt(a * a + b * b) for a, b in zip(curve.std, baseline.std))
    return LearningCurve(labeled_counts=curve.labeled_counts, mean=mean, std=std)
