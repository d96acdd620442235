"""Config schema, strategy grammar, and hash-stability tests."""

import textwrap

import pytest

from fastfish import fisher
from fastfish.bait import GreedyMode
from fastfish.config import (
    BaitStrategy,
    MarginStrategy,
    RandomStrategy,
    TypiclustStrategy,
    config_hash,
    parse_fim_kind,
    parse_strategy,
    protocol_hash,
    read_config,
    strategy_id,
)
from fastfish.exceptions import ConfigError


def write_config(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


MINIMAL = """
    dataset:
      train: train.dalb
      test: test.dalb
    strategy:
      name: random
    al:
      initial_labeled: 10
      acquisition_size: 5
      total_budget: 30
"""


class TestReadConfig:
    def test_minimal_defaults(self, tmp_path):
        cfg = read_config(write_config(tmp_path, MINIMAL))
        assert cfg.classifier.epochs == 200
        assert cfg.classifier.batch_size == 128
        assert cfg.classifier.learning_rate == 0.2
        assert cfg.classifier.weight_decay == 1e-4
        assert cfg.classifier.schedule == "cosine"
        assert cfg.seeds == tuple(range(10))
        assert isinstance(cfg.strategy, RandomStrategy)

    def test_bait_topc_defaults_to_two(self, tmp_path):
        cfg = read_config(
            write_config(
                tmp_path,
                """
                dataset: {train: a, test: b}
                strategy:
                  name: bait
                  params: {fim: topc}
                al: {initial_labeled: 5, acquisition_size: 5, total_budget: 20}
                """,
            )
        )
        assert cfg.strategy.fim == fisher.TopC(2)

    def test_zero_acquisition_rejected(self, tmp_path):
        path = write_config(
            tmp_path,
            """
            dataset: {train: a, test: b}
            strategy: {name: random}
            al: {initial_labeled: 5, acquisition_size: 0, total_budget: 20}
            """,
        )
        with pytest.raises(ConfigError, match="acquisition_size"):
            read_config(path)

    def test_unknown_keys_rejected(self, tmp_path):
        path = write_config(
            tmp_path,
            """
            dataset: {train: a, test: b, extra: 1}
            strategy: {name: random}
            al: {initial_labeled: 5, acquisition_size: 5, total_budget: 20}
            bogus: true
            """,
        )
        with pytest.raises(ConfigError) as err:
            read_config(path)
        message = str(err.value)
        assert "extra" in message and "bogus" in message

    def test_all_problems_reported_at_once(self, tmp_path):
        path = write_config(
            tmp_path,
            """
            dataset: {train: a}
            strategy: {name: nosuch}
            al: {initial_labeled: 0, acquisition_size: 5, total_budget: 20, seeds: [a]}
            classifier: {epochs: 0}
            """,
        )
        with pytest.raises(ConfigError) as err:
            read_config(path)
        message = str(err.value)
        for fragment in ("dataset.test", "nosuch", "initial_labeled", "seeds", "epochs"):
            assert fragment in message

    def test_budget_grid_must_align(self, tmp_path):
        path = write_config(
            tmp_path,
            """
            dataset: {train: a, test: b}
            strategy: {name: random}
            al: {initial_labeled: 10, acquisition_size: 7, total_budget: 30}
            """,
        )
        with pytest.raises(ConfigError, match="multiple"):
            read_config(path)


class TestStrategyGrammar:
    def test_grammar_round_trips(self):
        for name in ("random", "margin", "badge", "typiclust", "bait:binary",
                     "bait:exact", "bait:diag", "bait:topc:2", "bait:topc:5"):
            assert strategy_id(parse_strategy(name)) == name.replace("topc:2", "topc:2")

    def test_bare_bait_defaults_to_binary(self):
        kind = parse_strategy("bait")
        assert isinstance(kind.fim, fisher.Binary)
        assert kind.mode is GreedyMode.FORWARD_BACKWARD
        assert kind.lam == 1.0

    def test_params_spellings(self):
        kind = parse_strategy("bait", {"fim": "topc", "c": 3, "mode": "forward", "lambda": 0.5})
        assert kind == BaitStrategy(fim=fisher.TopC(3), mode=GreedyMode.FORWARD_ONLY, lam=0.5)

    def test_conflicting_specs_rejected(self):
        with pytest.raises(ConfigError):
            parse_strategy("bait:binary", {"fim": "exact"})
        with pytest.raises(ConfigError):
            parse_strategy("bait:topc:2", {"c": 3})

    def test_unknown_params_rejected(self):
        with pytest.raises(ConfigError):
            parse_strategy("margin", {"k_nn": 3})

    def test_typiclust_k_nn(self):
        assert parse_strategy("typiclust", {"k_nn": 7}) == TypiclustStrategy(k_nn=7)

    def test_fim_kind_parse(self):
        assert parse_fim_kind("exact") == fisher.Exact()
        assert parse_fim_kind("binary") == fisher.Binary()
        assert parse_fim_kind("diag") == fisher.Diagonal()
        assert parse_fim_kind("topc:4") == fisher.TopC(4)
        with pytest.raises(ConfigError):
            parse_fim_kind("sampled:3")


class TestShippedConfigs:
    def test_repo_configs_parse(self):
        import pathlib

        config_dir = pathlib.Path(__file__).resolve().parent.parent / "configs"
        paths = sorted(config_dir.glob("*.yaml"))
        assert paths, "no shipped configs found"
        names = set()
        for path in paths:
            cfg = read_config(path)
            assert cfg.total_budget == 210
            assert cfg.acquisition_size == 10
            assert cfg.classifier.epochs == 200
            names.add(strategy_id(cfg.strategy))
        assert {"random", "bait:binary", "bait:topc:2"} <= names


class TestHashes:
    def test_key_order_does_not_matter(self, tmp_path):
        a = read_config(write_config(tmp_path, MINIMAL, "a.yaml"))
        shuffled = """
            al:
              total_budget: 30
              acquisition_size: 5
              initial_labeled: 10
            strategy:
              name: random
            dataset:
              test: test.dalb
              train: train.dalb
        """
        b = read_config(write_config(tmp_path, shuffled, "b.yaml"))
        assert config_hash(a) == config_hash(b)
        assert protocol_hash(a) == protocol_hash(b)

    def test_strategy_changes_config_not_protocol(self, tmp_path):
        a = read_config(write_config(tmp_path, MINIMAL, "a.yaml"))
        margin = MINIMAL.replace("name: random", "name: margin")
        b = read_config(write_config(tmp_path, margin, "b.yaml"))
        assert config_hash(a) != config_hash(b)
        assert protocol_hash(a) == protocol_hash(b)
        assert isinstance(b.strategy, MarginStrategy)
