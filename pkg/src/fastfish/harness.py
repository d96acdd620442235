"""The active-learning loop: train, evaluate, time the selection, grow the labeled pool.

Each seed runs independently: the initial labeled pool comes from a dedicated
seed stream (so every strategy sees identical starting pools per repetition),
the classifier is re-initialized from scratch each cycle with a cycle-derived
seed, and only the strategy call itself is timed. Synthetic mixtures for
desk-scale verification live here too.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import baselines, classifier
from .bait import AcquisitionRequest, bait_select
from .config import (
    BadgeStrategy,
    BaitStrategy,
    ExperimentConfig,
    MarginStrategy,
    RandomStrategy,
    StrategyKind,
    TypiclustStrategy,
    strategy_id,
)
from .data import EmbeddingDataset, read_embeddings
from .exceptions import ConfigError, InvalidInputError
from .results import CycleRecord, LearningCurve, curve_from_records, diff_to_baseline

log = logging.getLogger(__name__)

# Stream constant separating initial-pool sampling from strategy randomness.
_INIT_POOL_STREAM = 0x7A11


@dataclass
class PoolState:
    """Disjoint labeled/unlabeled index lists partitioning the train split."""

    labeled: list[int]
    unlabeled: list[int]

    def __post_init__(self):
        lab, unlab = set(self.labeled), set(self.unlabeled)
        if len(lab) != len(self.labeled) or len(unlab) != len(self.unlabeled):
            raise InvalidInputError("pool index lists contain duplicates")
        if lab & unlab:
            raise InvalidInputError("labeled and unlabeled pools overlap")

    def acquire(self, indices) -> None:
        """Move ``indices`` from the unlabeled to the labeled pool."""
        moving = set(int(i) for i in indices)
        if not moving <= set(self.unlabeled):
            raise InvalidInputError("acquired indices must come from the unlabeled pool")
        self.labeled = self.labeled + sorted(moving)
        self.unlabeled = [i for i in self.unlabeled if i not in moving]


def auc(curve) -> float:
    """Mean of the per-cycle values; scale-preserving (percent in, percent out)."""
    values = np.asarray(curve, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise InvalidInputError("need a nonempty 1-D accuracy sequence")
    return float(values.mean())


def dispatch_strategy(
    kind: StrategyKind,
    *,
    features: np.ndarray,
    probs: np.ndarray,
    labeled: list[int],
    candidates: list[int],
    batch_size: int,
    seed: int,
) -> list[int]:
    """Run one strategy; returns dataset-level indices drawn from ``candidates``."""
    cand = np.asarray(candidates, dtype=np.intp)
    if isinstance(kind, RandomStrategy):
        eff = seed if kind.seed is None else kind.seed
        local = baselines.random_select(len(cand), batch_size, eff)
    elif isinstance(kind, MarginStrategy):
        local = baselines.margin_select(probs[cand], batch_size)
    elif isinstance(kind, BadgeStrategy):
        eff = seed if kind.seed is None else kind.seed
        local = baselines.badge_select(features[cand], probs[cand], batch_size, eff)
    elif isinstance(kind, TypiclustStrategy):
        return baselines.typiclust_select(
            features, labeled, batch_size, k_nn=kind.k_nn, seed=seed
        )
    elif isinstance(kind, BaitStrategy):
        request = AcquisitionRequest(
            batch_size=batch_size, candidates=tuple(candidates), mode=kind.mode
        )
        return bait_select(
            features,
            probs,
            labeled,
            request,
            kind.fim,
            kind.lam,
            candidate_cap=kind.candidate_cap,
            seed=seed,
        )
    else:
        raise InvalidInputError(f"unknown strategy kind {kind!r}")
    return [int(cand[i]) for i in local]


def _cycle_train_seed(base_seed: int, run_seed: int, cycle: int) -> int:
    ss = np.random.SeedSequence([base_seed & 0x7FFFFFFF, run_seed & 0x7FFFFFFF, cycle])
    return int(ss.generate_state(1)[0])


def _run_single_seed(
    config: ExperimentConfig,
    train_ds: EmbeddingDataset,
    test_ds: EmbeddingDataset,
    seed: int,
    select_override=None,
) -> list[CycleRecord]:
    sid = strategy_id(config.strategy)
    features = np.asarray(train_ds.features, dtype=np.float64)
    labels = train_ds.labels
    init_rng = np.random.default_rng([_INIT_POOL_STREAM, seed])
    initial = sorted(int(i) for i in init_rng.choice(train_ds.n, config.initial_labeled, replace=False))
    taken = set(initial)
    pool = PoolState(labeled=initial, unlabeled=[i for i in range(train_ds.n) if i not in taken])

    records: list[CycleRecord] = []
    cycle = 0
    while True:
        train_cfg = replace(
            config.classifier, seed=_cycle_train_seed(config.classifier.seed, seed, cycle)
        )
        params = classifier.train(
            features[pool.labeled], labels[pool.labeled], train_ds.n_classes, train_cfg
        )
        accuracy = classifier.evaluate(params, test_ds.features, test_ds.labels)
        if len(pool.labeled) >= config.total_budget:
            records.append(
                CycleRecord(
                    strategy=sid,
                    seed=seed,
                    cycle=cycle,
                    labeled_count=len(pool.labeled),
                    test_accuracy=accuracy,
                    acquisition_seconds=0.0,
                    selected=(),
                )
            )
            break
        probs = classifier.predict_proba(params, features)
        select = select_override or dispatch_strategy
        start = time.perf_counter()
        chosen = select(
            config.strategy,
            features=features,
            probs=probs,
            labeled=pool.labeled,
            candidates=pool.unlabeled,
            batch_size=config.acquisition_size,
            seed=seed,
        )
        elapsed = time.perf_counter() - start
        if len(set(chosen)) != config.acquisition_size:
            raise InvalidInputError(
                f"strategy returned {len(set(chosen))} unique indices, expected {config.acquisition_size}"
            )
        records.append(
            CycleRecord(
                strategy=sid,
                seed=seed,
                cycle=cycle,
                labeled_count=len(pool.labeled),
                test_accuracy=accuracy,
                acquisition_seconds=elapsed,
                selected=tuple(int(i) for i in chosen),
            )
        )
        pool.acquire(chosen)
        cycle += 1
    return records


def run_experiment(
    config: ExperimentConfig,
    *,
    threads: int | None = None,
    select_override=None,
) -> dict[int, list[CycleRecord]]:
    """Run every seed of the configured experiment.

    Returns records keyed by seed. A strategy failure aborts only its own
    seed (logged with a diagnostic); other seeds are unaffected.
    ``select_override`` replaces the strategy dispatcher, which the tests use
    to instrument timing and failure behavior.
    """
    train_ds = read_embeddings(config.dataset_train)
    test_ds = read_embeddings(config.dataset_test)
    if train_ds.dim != test_ds.dim or train_ds.n_classes != test_ds.n_classes:
        raise ConfigError("train/test datasets disagree on dimensions or class count")
    if config.total_budget > train_ds.n:
        raise ConfigError("al.total_budget exceeds the train split size")

    def job(seed: int):
        try:
            return seed, _run_single_seed(config, train_ds, test_ds, seed, select_override)
        except Exception:
            log.exception("seed %d aborted for strategy %s", seed, strategy_id(config.strategy))
            return seed, None

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(job, config.seeds))
    else:
        outcomes = [job(seed) for seed in config.seeds]
    return {seed: recs for seed, recs in outcomes if recs is not None}


def experiment_curve(records_by_seed: dict[int, list[CycleRecord]]) -> LearningCurve:
    """Aggregate per-seed records into a learning curve (re-exported convenience)."""
    return curve_from_records(records_by_seed)


def gen_synthetic(n: int, d: int, k: int, separation: float, label_noise: float, seed) -> EmbeddingDataset:
    """Balanced Gaussian mixture with unit isotropic noise.

    Class means sit on a seeded random orthonormal frame (normalized Gaussian
    directions when k > d) scaled by ``separation``; labels are balanced then
    shuffled; ``label_noise`` flips each label to a uniformly random other
    class. Deterministic given the seed.
    """
    if k < 2 or d < 1 or n < k:
        raise InvalidInputError("need k >= 2, d >= 1, n >= k")
    if not 0.0 <= label_noise < 1.0:
        raise InvalidInputError("label_noise must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((d, max(k, 1)))
    if k <= d:
        q, _ = np.linalg.qr(raw[:, :k])
        frame = q
    else:
        frame = raw[:, :k] / np.linalg.norm(raw[:, :k], axis=0, keepdims=True)
    means = separation * frame.T  # (k, d)

    counts = np.full(k, n // k)
    counts[: n % k] += 1
    labels = np.repeat(np.arange(1, k + 1), counts)
    labels = labels[rng.permutation(n)]
    features = means[labels - 1] + rng.standard_normal((n, d))
    if label_noise > 0:
        flip = rng.random(n) < label_noise
        shift = rng.integers(1, k, size=n)
        flipped = ((labels - 1 + shift) % k) + 1
        labels = np.where(flip, flipped, labels)
    metadata = {
        "name": "synthetic",
        "source": "fastfish synth",
        "params": {
            "n": n,
            "d": d,
            "k": k,
            "separation": separation,
            "label_noise": label_noise,
            "seed": int(seed),
        },
    }
    return EmbeddingDataset(
        features=features.astype(np.float32), labels=labels, n_classes=k, metadata=metadata
    )


def split_dataset(ds: EmbeddingDataset, n_first: int) -> tuple[EmbeddingDataset, EmbeddingDataset]:
    """Order-preserving split into the first ``n_first`` rows and the rest."""
    if not 1 <= n_first < ds.n:
        raise InvalidInputError("split point must leave both parts nonempty")
    first = EmbeddingDataset(
        features=ds.features[:n_first].copy(),
        labels=ds.labels[:n_first].copy(),
        n_classes=ds.n_classes,
        metadata={**ds.metadata, "split": f"rows[0:{n_first}]"},
    )
    second = EmbeddingDataset(
        features=ds.features[n_first:].copy(),
        labels=ds.labels[n_first:].copy(),
        n_classes=ds.n_classes,
        metadata={**ds.metadata, "split": f"rows[{n_first}:{ds.n}]"},
    )
    return first, second


__all__ = [
    "PoolState",
    "auc",
    "diff_to_baseline",
    "dispatch_strategy",
    "run_experiment",
    "experiment_curve",
    "gen_synthetic",
    "split_dataset",
]
