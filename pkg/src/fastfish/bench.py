"""Micro-benchmark for per-instance information matrices and candidate scoring.

For each (kind, K) pair this measures, on synthetic instances:

* fim_seconds:   median wall time to build one instance's factor (vectorized
                 construction over all n instances, divided by n), and
* score_seconds: median wall time to score one candidate's trace gain against
                 a fixed accumulator/target pair.

The binary kind should be flat across K while the exact kind grows steeply,
which is the complexity contrast the acceptance suite checks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import fisher
from .backends import get_backend
from .config import fim_kind_id, parse_fim_kind
from .exceptions import InvalidInputError

_LABELED_FOR_STATE = 32

# Cap (float64 elements) on the prebuilt candidate-factor stack; when a
# (kind, K) pair would exceed it, scoring is timed on a candidate subset.
_SCORE_ELEMS_BUDGET = 200_000_000


@dataclass(frozen=True)
class BenchRow:
    kind: str
    k: int
    d: int
    n: int
    reps: int
    fim_seconds: float
    score_seconds: float
    backend: str


def _best_time(fn, reps: int) -> float:
    """Fastest of ``reps`` timed runs after one warmup.

    The minimum is the standard low-noise estimator for achievable cost;
    medians still wobble noticeably on small shared machines.
    """
    fn()  # warmup
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def _build_fn(kind, H, P):
    if isinstance(kind, fisher.Binary):
        return lambda: fisher.binary_factor_matrix(H, P)
    if isinstance(kind, fisher.Diagonal):
        return lambda: fisher.diagonal_entry_matrix(H, P)
    c = kind.c if isinstance(kind, fisher.TopC) else None
    k = P.shape[1]
    per_instance = k * H.shape[1] * (c if c is not None else k)
    chunk = max(1, min(64, 8_000_000 // max(per_instance, 1)))

    def build():
        for start in range(0, H.shape[0], chunk):
            fisher.multiclass_factor_stack(H[start : start + chunk], P[start : start + chunk], c)

    return build


def _score_fn(kind, H, P, kernels):
    """Build a scoring closure; returns (fn, number of candidates it scores)."""
    lam = 1.0
    labeled = slice(0, min(_LABELED_FOR_STATE, H.shape[0]))
    if isinstance(kind, fisher.Diagonal):
        d_cand = fisher.diagonal_entry_matrix(H, P)
        a = fisher.diagonal_entry_matrix(H, P).mean(axis=0)
        m = lam + fisher.diagonal_entry_matrix(H[labeled], P[labeled]).mean(axis=0)
        return lambda: (d_cand * (a / (m * (m + d_cand)))).sum(axis=1), H.shape[0]
    if isinstance(kind, fisher.Binary):
        factors = fisher.binary_factor_matrix(H, P)
        dim = H.shape[1]
        pooled = fisher.pool_fim(H, P, kind).matrix
        m0 = lam * np.eye(dim) + fisher.pool_fim(H[labeled], P[labeled], kind).matrix
        minv = np.linalg.inv(m0)
        q = minv @ pooled @ minv
        return lambda: kernels.rank1_gains(factors, minv, q), H.shape[0]
    c = kind.c if isinstance(kind, fisher.TopC) else None
    k = P.shape[1]
    dim = k * H.shape[1]
    r = c if c is not None else k
    n_score = max(1, min(H.shape[0], _SCORE_ELEMS_BUDGET // (dim * r)))
    factors = fisher.multiclass_factor_stack(H[:n_score], P[:n_score], c)
    # The pool target only shapes the scoring problem; a capped instance
    # subset keeps the untimed setup cheap at large K.
    n_pool = min(H.shape[0], 128)
    pooled = fisher.pool_fim(H[:n_pool], P[:n_pool], kind).matrix
    m0 = lam * np.eye(dim) + fisher.pool_fim(H[labeled], P[labeled], kind).matrix
    minv = np.linalg.inv(m0)
    q = minv @ pooled @ minv
    return lambda: kernels.lowrank_gains(factors, minv, q), n_score


def bench_fim(
    d: int,
    k_list,
    n: int,
    kind_list,
    repetitions: int,
    *,
    seed: int = 0,
    backend: str | None = None,
) -> list[BenchRow]:
    """Cross product of class counts and kinds; returns machine-readable rows."""
    if d < 1 or n < 1 or repetitions < 1 or not k_list:
        raise InvalidInputError("sizes and repetition count must be positive")
    kinds = [parse_fim_kind(k) if isinstance(k, str) else k for k in kind_list]
    kernels = get_backend(backend)
    rows = []
    for k in k_list:
        if k < 2:
            raise InvalidInputError("class counts must be >= 2")
        rng = np.random.default_rng([seed, k])
        H = rng.standard_normal((n, d))
        P = fisher.softmax(rng.standard_normal((n, k)))
        for kind in kinds:
            if isinstance(kind, fisher.TopC) and kind.c > k:
                continue
            fim_t = _best_time(_build_fn(kind, H, P), repetitions)
            score, n_scored = _score_fn(kind, H, P, kernels)
            score_t = _best_time(score, repetitions)
            rows.append(
                BenchRow(
                    kind=fim_kind_id(kind),
                    k=int(k),
                    d=int(d),
                    n=int(n),
                    reps=int(repetitions),
                    fim_seconds=fim_t / n,
                    score_seconds=score_t / n_scored,
                    backend=kernels.NAME,
                )
            )
    return rows


def rows_to_csv(rows) -> str:
    lines = ["kind,k,d,n,reps,fim_seconds_per_instance,score_seconds_per_candidate,backend"]
    for r in rows:
        lines.append(
            f"{r.kind},{r.k},{r.d},{r.n},{r.reps},{r.fim_seconds:.9f},{r.score_seconds:.9f},{r.backend}"
        )
    return "\n".join(lines) + "\n"
