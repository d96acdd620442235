"""Multinomial logistic-regression head trained on frozen features.

Training minimizes mean negative log-likelihood plus an L2 penalty on the
weight matrix with adaptive first-order moments ("radam-like": Adam moments
plus a linear warm-up over the first 5 epochs standing in for rectification),
followed by a cosine or constant schedule. Weights start from a seeded
Gaussian (std 0.01), the bias from zero; a fixed seed makes the whole
trajectory bitwise reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, InvalidInputError, TrainingError
from .fisher import softmax

WARMUP_EPOCHS = 5
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

SCHEDULES = ("constant", "cosine")


@dataclass(frozen=True)
class ClassifierParams:
    """Last-layer weights (K x D) and bias (K,)."""

    weights: np.ndarray
    bias: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 0.2
    weight_decay: float = 1e-4
    schedule: str = "cosine"
    seed: int = 0
    optimizer: str = "radam-like"

    def __post_init__(self):
        problems = []
        if self.epochs < 1:
            problems.append("epochs must be >= 1")
        if self.batch_size < 1:
            problems.append("batch_size must be >= 1")
        if not self.learning_rate > 0:
            problems.append("learning_rate must be > 0")
        if self.weight_decay < 0:
            problems.append("weight_decay must be >= 0")
        if self.schedule not in SCHEDULES:
            problems.append(f"schedule must be one of {SCHEDULES}")
        if self.optimizer != "radam-like":
            problems.append("optimizer must be 'radam-like'")
        if problems:
            raise ConfigError("; ".join(problems))


def _check_batch(features, labels, n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise InvalidInputError("features must be (N, D) with matching (N,) labels")
    if x.shape[0] == 0:
        raise InvalidInputError("batch must be nonempty")
    if n_classes < 2:
        raise InvalidInputError("need at least two classes")
    if y.min() < 1 or y.max() > n_classes:
        raise InvalidInputError(f"labels must lie in 1..{n_classes}")
    return x, y


def loss_and_grad(
    params: ClassifierParams, batch_features, batch_labels, weight_decay: float
) -> tuple[float, ClassifierParams]:
    """Mean NLL plus (weight_decay / 2) * ||W||^2, with its analytic gradient."""
    w, b = params.weights, params.bias
    x, y = _check_batch(batch_features, batch_labels, w.shape[0])
    n = x.shape[0]
    logits = x @ w.T + b
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1, keepdims=True))
    log_probs = z - log_norm
    nll = -float(log_probs[np.arange(n), y - 1].mean())
    loss = nll + 0.5 * weight_decay * float(np.sum(w * w))
    g = np.exp(log_probs)
    g[np.arange(n), y - 1] -= 1.0
    g /= n
    grad_w = g.T @ x + weight_decay * w
    grad_b = g.sum(axis=0)
    return loss, ClassifierParams(weights=grad_w, bias=grad_b)


def _lr_factor(schedule: str, epochs: int, frac_epoch: float) -> float:
    """Schedule multiplier at a fractional epoch position."""
    if frac_epoch < WARMUP_EPOCHS:
        return frac_epoch / WARMUP_EPOCHS
    if schedule == "constant" or epochs <= WARMUP_EPOCHS:
        return 1.0
    progress = min(1.0, (frac_epoch - WARMUP_EPOCHS) / (epochs - WARMUP_EPOCHS))
    return 0.5 * (1.0 + math.cos(math.pi * progress))


def train(
    features,
    labels,
    n_classes: int,
    config: TrainConfig,
    on_epoch_end=None,
) -> ClassifierParams:
    """Fit the head from a fresh seeded initialization.

    ``on_epoch_end(epoch, full_loss)``, when given, receives the loss over the
    whole training set after each epoch.
    """
    x, y = _check_batch(features, labels, n_classes)
    n, d = x.shape
    rng = np.random.default_rng(config.seed)
    w = rng.normal(0.0, 0.01, size=(n_classes, d))
    b = np.zeros(n_classes)

    m_w = np.zeros_like(w)
    v_w = np.zeros_like(w)
    m_b = np.zeros_like(b)
    v_b = np.zeros_like(b)

    steps_per_epoch = max(1, math.ceil(n / config.batch_size))
    t = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            params = ClassifierParams(weights=w, bias=b)
            loss, grad = loss_and_grad(params, x[idx], y[idx], config.weight_decay)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch} step {t} "
                    f"(lr={config.learning_rate}, batch={config.batch_size})"
                )
            t += 1
            lr = config.learning_rate * _lr_factor(
                config.schedule, config.epochs, epoch + (t - 1) % steps_per_epoch / steps_per_epoch
            )
            corr1 = 1.0 - ADAM_BETA1**t
            corr2 = 1.0 - ADAM_BETA2**t
            m_w = ADAM_BETA1 * m_w + (1 - ADAM_BETA1) * grad.weights
            v_w = ADAM_BETA2 * v_w + (1 - ADAM_BETA2) * grad.weights**2
            m_b = ADAM_BETA1 * m_b + (1 - ADAM_BETA1) * grad.bias
            v_b = ADAM_BETA2 * v_b + (1 - ADAM_BETA2) * grad.bias**2
            w = w - lr * (m_w / corr1) / (np.sqrt(v_w / corr2) + ADAM_EPS)
            b = b - lr * (m_b / corr1) / (np.sqrt(v_b / corr2) + ADAM_EPS)
        if on_epoch_end is not None:
            full_loss, _ = loss_and_grad(
                ClassifierParams(weights=w, bias=b), x, y, config.weight_decay
            )
            on_epoch_end(epoch, full_loss)
    return ClassifierParams(weights=w, bias=b)


def predict_proba(params: ClassifierParams, features) -> np.ndarray:
    """Row-wise class probabilities softmax(W h + b)."""
    x = np.asarray(features, dtype=np.float64)
    return softmax(x @ params.weights.T + params.bias)


def evaluate(params: ClassifierParams, test_features, test_labels) -> float:
    """Fraction of argmax-correct predictions; argmax ties go to the smallest class."""
    x, y = _check_batch(test_features, test_labels, params.weights.shape[0])
    logits = x @ params.weights.T + params.bias
    predictions = np.argmax(logits, axis=1) + 1
    return float(np.mean(predictions == y))
