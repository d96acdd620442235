"""Experiment configuration: schema, strategy grammar, and stable hashing.

Configs are YAML with four sections (``dataset``, ``strategy``, ``al``,
``classifier``). Strategies are named with a small colon grammar that is also
used on the command line and in result tables:

    random | margin | badge | typiclust
    bait:exact | bait:topc[:c] | bait:binary | bait:diag

``strategy.params`` may supply the same information long-form (for bait:
``fim``, ``c``, ``mode``, ``lambda``, ``candidate_cap``; for typiclust:
``k_nn``; for random/badge: ``seed``). Unknown keys anywhere are rejected,
and all problems are reported at once.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Union

import yaml

from . import fisher
from .bait import GreedyMode
from .classifier import TrainConfig
from .exceptions import ConfigError

DEFAULT_SEEDS = tuple(range(10))
DEFAULT_TOPC = 2


@dataclass(frozen=True)
class RandomStrategy:
    seed: int | None = None


@dataclass(frozen=True)
class MarginStrategy:
    pass


@dataclass(frozen=True)
class BadgeStrategy:
    seed: int | None = None


@dataclass(frozen=True)
class TypiclustStrategy:
    k_nn: int = 20


@dataclass(frozen=True)
class BaitStrategy:
    fim: fisher.FimKind = field(default_factory=fisher.Binary)
    mode: GreedyMode = GreedyMode.FORWARD_BACKWARD
    lam: float = 1.0
    candidate_cap: int | None = None


StrategyKind = Union[RandomStrategy, MarginStrategy, BadgeStrategy, TypiclustStrategy, BaitStrategy]


def parse_fim_kind(text: str) -> fisher.FimKind:
    parts = text.lower().split(":")
    name = parts[0]
    if name == "exact" and len(parts) == 1:
        return fisher.Exact()
    if name == "binary" and len(parts) == 1:
        return fisher.Binary()
    if name in ("diag", "diagonal") and len(parts) == 1:
        return fisher.Diagonal()
    if name == "topc":
        if len(parts) == 1:
            return fisher.TopC(DEFAULT_TOPC)
        if len(parts) == 2 and parts[1].isdigit():
            return fisher.TopC(int(parts[1]))
    raise ConfigError(f"unknown information-matrix kind {text!r}")


def fim_kind_id(kind: fisher.FimKind) -> str:
    if isinstance(kind, fisher.Exact):
        return "exact"
    if isinstance(kind, fisher.TopC):
        return f"topc:{kind.c}"
    if isinstance(kind, fisher.Binary):
        return "binary"
    if isinstance(kind, fisher.Diagonal):
        return "diag"
    raise ConfigError(f"kind {kind!r} has no strategy name")


def parse_strategy(name: str, params: dict | None = None) -> StrategyKind:
    """Build a strategy from its grammar name plus optional long-form params."""
    params = dict(params or {})
    parts = name.lower().split(":")
    base = parts[0]

    def take(key, default=None):
        return params.pop(key, default)

    if base == "random" and len(parts) == 1:
        seed = take("seed")
        kind = RandomStrategy(seed=None if seed is None else int(seed))
    elif base == "margin" and len(parts) == 1:
        kind = MarginStrategy()
    elif base == "badge" and len(parts) == 1:
        seed = take("seed")
        kind = BadgeStrategy(seed=None if seed is None else int(seed))
    elif base == "typiclust" and len(parts) == 1:
        kind = TypiclustStrategy(k_nn=int(take("k_nn", 20)))
    elif base == "bait":
        fim_text = take("fim")
        if len(parts) > 1:
            if fim_text is not None:
                raise ConfigError("strategy name already fixes the fim kind; drop params.fim")
            fim_text = ":".join(parts[1:])
        elif fim_text is None:
            fim_text = "binary"
        c = take("c")
        if c is not None:
            if ":" in fim_text:
                raise ConfigError("c given twice (in the fim name and as a param)")
            if fim_text != "topc":
                raise ConfigError("params.c only applies to the topc kind")
            fim_text = f"topc:{int(c)}"
        mode_text = take("mode", GreedyMode.FORWARD_BACKWARD.value)
        try:
            mode = GreedyMode(mode_text)
        except ValueError:
            raise ConfigError(
                f"unknown greedy mode {mode_text!r} (expected 'forward' or 'forward_backward')"
            ) from None
        lam = float(take("lambda", 1.0))
        if lam <= 0:
            raise ConfigError("lambda must be positive")
        cap = take("candidate_cap")
        kind = BaitStrategy(
            fim=parse_fim_kind(fim_text),
            mode=mode,
            lam=lam,
            candidate_cap=None if cap is None else int(cap),
        )
    else:
        raise ConfigError(f"unknown strategy {name!r}")
    if params:
        raise ConfigError(f"unknown strategy params: {sorted(params)}")
    return kind


def strategy_id(kind: StrategyKind) -> str:
    if isinstance(kind, RandomStrategy):
        return "random"
    if isinstance(kind, MarginStrategy):
        return "margin"
    if isinstance(kind, BadgeStrategy):
        return "badge"
    if isinstance(kind, TypiclustStrategy):
        return "typiclust"
    if isinstance(kind, BaitStrategy):
        return f"bait:{fim_kind_id(kind.fim)}"
    raise ConfigError(f"unknown strategy kind {kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_train: str
    dataset_test: str
    strategy: StrategyKind
    initial_labeled: int
    acquisition_size: int
    total_budget: int
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    classifier: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        problems = []
        if self.initial_labeled < 1:
            problems.append("al.initial_labeled must be >= 1")
        if self.acquisition_size < 1:
            problems.append("al.acquisition_size must be >= 1")
        if self.total_budget < self.initial_labeled:
            problems.append("al.total_budget must be >= al.initial_labeled")
        elif (self.total_budget - self.initial_labeled) % self.acquisition_size != 0:
            problems.append(
                "al.total_budget minus al.initial_labeled must be a multiple of al.acquisition_size"
            )
        if not self.seeds:
            problems.append("al.seeds must be nonempty")
        if problems:
            raise ConfigError("; ".join(problems))


_AL_KEYS = {"initial_labeled", "acquisition_size", "total_budget", "seeds"}
_CLASSIFIER_KEYS = {"epochs", "batch_size", "learning_rate", "weight_decay", "schedule", "seed"}


def _expect_int(value, where, problems, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append(f"{where}: expected an integer, got {value!r}")
        return None
    if minimum is not None and value < minimum:
        problems.append(f"{where}: must be >= {minimum}")
        return None
    return value


def read_config(path) -> ExperimentConfig:
    """Load, validate, and default-fill an experiment config.

    Collects every problem before raising, so one pass reports all issues.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")

    problems: list[str] = []
    unknown = set(doc) - {"dataset", "strategy", "al", "classifier"}
    if unknown:
        problems.append(f"unknown top-level keys: {sorted(unknown)}")

    dataset = doc.get("dataset")
    train_path = test_path = None
    if not isinstance(dataset, dict):
        problems.append("dataset section is required (dataset.train, dataset.test)")
    else:
        extra = set(dataset) - {"train", "test"}
        if extra:
            problems.append(f"unknown dataset keys: {sorted(extra)}")
        train_path = dataset.get("train")
        test_path = dataset.get("test")
        if not isinstance(train_path, str):
            problems.append("dataset.train: expected a path string")
        if not isinstance(test_path, str):
            problems.append("dataset.test: expected a path string")

    strategy = None
    strat_doc = doc.get("strategy")
    if not isinstance(strat_doc, dict) or not isinstance(strat_doc.get("name"), str):
        problems.append("strategy section with a string 'name' is required")
    else:
        extra = set(strat_doc) - {"name", "params"}
        if extra:
            problems.append(f"unknown strategy keys: {sorted(extra)}")
        raw_params = strat_doc.get("params", {})
        if raw_params is None:
            raw_params = {}
        if not isinstance(raw_params, dict):
            problems.append("strategy.params: expected a mapping")
        else:
            try:
                strategy = parse_strategy(strat_doc["name"], raw_params)
            except ConfigError as exc:
                problems.append(str(exc))

    al = doc.get("al")
    initial = acq = budget = None
    seeds = DEFAULT_SEEDS
    if not isinstance(al, dict):
        problems.append("al section is required")
    else:
        extra = set(al) - _AL_KEYS
        if extra:
            problems.append(f"unknown al keys: {sorted(extra)}")
        initial = _expect_int(al.get("initial_labeled"), "al.initial_labeled", problems, 1)
        acq = _expect_int(al.get("acquisition_size"), "al.acquisition_size", problems, 1)
        budget = _expect_int(al.get("total_budget"), "al.total_budget", problems, 1)
        if "seeds" in al:
            raw_seeds = al["seeds"]
            if not isinstance(raw_seeds, list) or not raw_seeds or not all(
                isinstance(s, int) and not isinstance(s, bool) for s in raw_seeds
            ):
                problems.append("al.seeds: expected a nonempty list of integers")
            else:
                seeds = tuple(raw_seeds)

    clf_doc = doc.get("classifier", {})
    classifier = None
    if clf_doc is None:
        clf_doc = {}
    if not isinstance(clf_doc, dict):
        problems.append("classifier section must be a mapping")
    else:
        extra = set(clf_doc) - _CLASSIFIER_KEYS
        if extra:
            problems.append(f"unknown classifier keys: {sorted(extra)}")
        try:
            classifier = TrainConfig(**{k: v for k, v in clf_doc.items() if k in _CLASSIFIER_KEYS})
        except (ConfigError, TypeError) as exc:
            problems.append(f"classifier: {exc}")

    if not problems:
        try:
            return ExperimentConfig(
                dataset_train=train_path,
                dataset_test=test_path,
                strategy=strategy,
                initial_labeled=initial,
                acquisition_size=acq,
                total_budget=budget,
                seeds=seeds,
                classifier=classifier,
            )
        except ConfigError as exc:
            problems.append(str(exc))
    raise ConfigError("invalid config: " + "; ".join(problems))


def _canonical(config: ExperimentConfig, include_strategy: bool) -> dict:
    doc = {
        "dataset": {"train": config.dataset_train, "test": config.dataset_test},
        "al": {
            "initial_labeled": config.initial_labeled,
            "acquisition_size": config.acquisition_size,
            "total_budget": config.total_budget,
            "seeds": list(config.seeds),
        },
        "classifier": {
            "epochs": config.classifier.epochs,
            "batch_size": config.classifier.batch_size,
            "learning_rate": config.classifier.learning_rate,
            "weight_decay": config.classifier.weight_decay,
            "schedule": config.classifier.schedule,
            "seed": config.classifier.seed,
        },
    }
    if include_strategy:
        kind = config.strategy
        strat: dict = {"name": strategy_id(kind)}
        if isinstance(kind, BaitStrategy):
            strat["mode"] = kind.mode.value
            strat["lambda"] = kind.lam
            strat["candidate_cap"] = kind.candidate_cap
        elif isinstance(kind, TypiclustStrategy):
            strat["k_nn"] = kind.k_nn
        elif isinstance(kind, (RandomStrategy, BadgeStrategy)):
            strat["seed"] = kind.seed
        doc["strategy"] = strat
    return doc


def config_hash(config: ExperimentConfig) -> str:
    """Stable digest of the full config; key order in the source never matters."""
    blob = json.dumps(_canonical(config, include_strategy=True), sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def protocol_hash(config: ExperimentConfig) -> str:
    """Digest of everything except the strategy, for cross-strategy comparability."""
    blob = json.dumps(_canonical(config, include_strategy=False), sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
