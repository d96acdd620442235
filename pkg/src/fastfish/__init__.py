"""Pool-based active-learning selection over precomputed feature embeddings.

The package trains a softmax linear head on frozen features, scores unlabeled
instances with low-rank Fisher information factors, and greedily builds
acquisition batches that minimize the trace of the regularized inverse
information accumulator against the pool target. Baseline strategies
(random, margin, badge, typiclust), a benchmark harness, a binary dataset
container, and a CLI round out the toolbox.
"""

__version__ = "0.1.0"

from .bait import AcquisitionRequest, GreedyMode, bait_select
from .baselines import badge_select, margin_select, random_select, typiclust_select
from .bench import BenchRow, bench_fim
from .classifier import ClassifierParams, TrainConfig, evaluate, loss_and_grad, predict_proba, train
from .config import (
    BadgeStrategy,
    BaitStrategy,
    ExperimentConfig,
    MarginStrategy,
    RandomStrategy,
    TypiclustStrategy,
    config_hash,
    parse_strategy,
    protocol_hash,
    read_config,
    strategy_id,
)
from .data import EmbeddingDataset, read_embeddings, write_embeddings
from .exceptions import (
    AggregationError,
    ConfigError,
    DataValidationError,
    EmptyPoolError,
    FastfishError,
    FormatError,
    InvalidInputError,
    NumericalError,
    TrainingError,
)
from .fisher import (
    Binary,
    Diagonal,
    Exact,
    FimFactor,
    PoolFim,
    Sampled,
    TopC,
    class_gradient,
    fim_binary,
    fim_diagonal,
    fim_exact,
    fim_sampled,
    fim_topc,
    pool_fim,
    softmax,
    topc_classes,
)
from .harness import (
    PoolState,
    auc,
    dispatch_strategy,
    gen_synthetic,
    run_experiment,
    split_dataset,
)
from .results import (
    CycleRecord,
    LearningCurve,
    Summary,
    curve_from_records,
    diff_to_baseline,
    read_results,
    summarize,
    write_results,
)
from .woodbury import BaitState, initial_state, woodbury_gain, woodbury_update
