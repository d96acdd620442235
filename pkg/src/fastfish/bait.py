"""Greedy batch acquisition that minimizes tr((M + I_x)^{-1} A).

``M`` starts as ``lam * I`` plus the average information matrix of the
labeled pool and grows by one instance matrix per greedy step; ``A`` is the
average information matrix of labeled and candidate instances together.
Candidates are scored by the trace *gain* their rank-r factor produces
(see ``woodbury``), so each step is O(dim^2 r) per candidate instead of a
fresh O(dim^3) inversion.

Forward-only mode takes B greedy steps. Forward-backward mode (the default
used by the harness) over-selects 2B and then prunes the B instances whose
removal increases the objective the least.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import fisher
from .backends import get_backend
from .exceptions import InvalidInputError, NumericalError
from .woodbury import lowrank_inverse_update


class GreedyMode(str, enum.Enum):
    FORWARD_ONLY = "forward"
    FORWARD_BACKWARD = "forward_backward"


@dataclass(frozen=True)
class AcquisitionRequest:
    """One batch acquisition: how many to pick from which candidate rows."""

    batch_size: int
    candidates: tuple[int, ...]
    mode: GreedyMode = GreedyMode.FORWARD_BACKWARD

    def __post_init__(self):
        cand = tuple(int(i) for i in self.candidates)
        object.__setattr__(self, "candidates", cand)
        if len(set(cand)) != len(cand):
            raise InvalidInputError("candidate indices must be unique")
        if self.batch_size < 1:
            raise InvalidInputError("batch size must be >= 1")
        if self.batch_size > len(cand):
            raise InvalidInputError("batch size exceeds candidate pool")


def _pooled_matrix(H, P, kind) -> np.ndarray:
    return fisher.pool_fim(H, P, kind).matrix


def _candidate_factors(H, P, kind) -> np.ndarray:
    """Stacked candidate factors: (N, dim) for the binary kind, else (N, dim, r)."""
    if isinstance(kind, fisher.Binary):
        return fisher.binary_factor_matrix(H, P)
    if isinstance(kind, fisher.Exact):
        return fisher.multiclass_factor_stack(H, P, None)
    if isinstance(kind, fisher.TopC):
        return fisher.multiclass_factor_stack(H, P, kind.c)
    raise InvalidInputError(f"selection does not support kind {kind!r}")


def _removal_losses(factors_sel: list[np.ndarray], minv: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Objective increase caused by removing each currently selected factor."""
    losses = np.empty(len(factors_sel))
    for i, v in enumerate(factors_sel):
        u = minv @ v
        s = np.eye(v.shape[1]) - v.T @ u
        w = v.T @ q @ v
        try:
            losses[i] = np.trace(np.linalg.solve(s, w))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"removal would leave accumulator indefinite: {exc}") from exc
    return losses


def bait_select(
    features,
    probs,
    labeled_idx,
    request: AcquisitionRequest,
    kind: fisher.FimKind,
    lam: float = 1.0,
    *,
    candidate_cap: int | None = None,
    seed: int = 0,
    backend: str | None = None,
    trace: list | None = None,
) -> list[int]:
    """Greedily pick ``request.batch_size`` candidate indices.

    ``features`` and ``probs`` cover the whole dataset; ``labeled_idx`` and
    ``request.candidates`` index into their rows. Passing a list as ``trace``
    collects the objective tr(M^{-1} A) after initialization and after every
    update, which the equivalence tests compare against a dense oracle.
    ``candidate_cap`` optionally subsamples the candidates scored per step
    (seeded); it is disabled by default.
    """
    if lam <= 0:
        raise InvalidInputError("regularizer must be positive")
    if isinstance(kind, (fisher.Sampled,)):
        raise InvalidInputError("selection requires a deterministic kind (exact, topc, binary, diag)")
    H, P = fisher.check_matrix_inputs(features, probs)
    labeled = np.asarray(list(labeled_idx), dtype=np.intp)
    cand = np.asarray(request.candidates, dtype=np.intp)
    if cand.size and (cand.min() < 0 or cand.max() >= H.shape[0]):
        raise InvalidInputError("candidate index out of range")
    if labeled.size and (labeled.min() < 0 or labeled.max() >= H.shape[0]):
        raise InvalidInputError("labeled index out of range")
    b = request.batch_size
    all_idx = np.concatenate([labeled, cand])

    if isinstance(kind, fisher.Diagonal):
        return _diagonal_select(H, P, labeled, cand, request, lam, trace)

    kernels = get_backend(backend)
    factors = _candidate_factors(H[cand], P[cand], kind)
    rank1 = factors.ndim == 2
    dim = factors.shape[1]

    a = _pooled_matrix(H[all_idx], P[all_idx], kind)
    m = lam * np.eye(dim)
    if labeled.size:
        m += _pooled_matrix(H[labeled], P[labeled], kind)
    minv = np.linalg.inv(m)
    minv = (minv + minv.T) / 2.0

    def objective() -> float:
        return float(np.sum(minv * a))

    if trace is not None:
        trace.append(objective())

    rng = np.random.default_rng(seed)
    available = np.ones(cand.size, dtype=bool)
    selected: list[int] = []  # positions into cand, in forward order
    n_forward = b if request.mode is GreedyMode.FORWARD_ONLY else min(2 * b, cand.size)

    for _ in range(n_forward):
        q = minv @ a @ minv
        q = (q + q.T) / 2.0
        pool_positions = np.flatnonzero(available)
        if candidate_cap is not None and pool_positions.size > candidate_cap:
            pool_positions = np.sort(rng.choice(pool_positions, candidate_cap, replace=False))
        sub = factors[pool_positions]
        try:
            gains = kernels.rank1_gains(sub, minv, q) if rank1 else kernels.lowrank_gains(sub, minv, q)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"candidate scoring failed: {exc}") from exc
        best = int(pool_positions[int(np.argmax(gains))])
        v = factors[best][:, None] if rank1 else factors[best]
        minv = lowrank_inverse_update(minv, v)
        available[best] = False
        selected.append(best)
        if trace is not None:
            trace.append(objective())

    while len(selected) > b:
        q = minv @ a @ minv
        q = (q + q.T) / 2.0
        vs = [factors[i][:, None] if rank1 else factors[i] for i in selected]
        losses = _removal_losses(vs, minv, q)
        drop = int(np.argmin(losses))
        minv = lowrank_inverse_update(minv, vs[drop], subtract=True)
        selected.pop(drop)
        if trace is not None:
            trace.append(objective())

    return [int(cand[i]) for i in selected]


def _diagonal_select(H, P, labeled, cand, request, lam, trace) -> list[int]:
    """Greedy selection with the accumulator, target, and instances all diagonal."""
    d_cand = fisher.diagonal_entry_matrix(H[cand], P[cand])
    all_idx = np.concatenate([labeled, cand])
    a = fisher.diagonal_entry_matrix(H[all_idx], P[all_idx]).mean(axis=0)
    m = np.full(d_cand.shape[1], lam)
    if labeled.size:
        m += fisher.diagonal_entry_matrix(H[labeled], P[labeled]).mean(axis=0)

    if trace is not None:
        trace.append(float(np.sum(a / m)))

    b = request.batch_size
    available = np.ones(cand.size, dtype=bool)
    selected: list[int] = []
    n_forward = b if request.mode is GreedyMode.FORWARD_ONLY else min(2 * b, cand.size)

    for _ in range(n_forward):
        gains = (d_cand * (a / (m * (m + d_cand)))).sum(axis=1)
        gains[~available] = -np.inf
        best = int(np.argmax(gains))
        m = m + d_cand[best]
        available[best] = False
        selected.append(best)
        if trace is not None:
            trace.append(float(np.sum(a / m)))

    while len(selected) > b:
        rows = d_cand[selected]
        denom = m - rows
        if np.any(denom <= 0):
            raise NumericalError("diagonal downdate would make the accumulator non-positive")
        losses = (rows * (a / (denom * m))).sum(axis=1)
        drop = int(np.argmin(losses))
        m = m - d_cand[selected[drop]]
        selected.pop(drop)
        if trace is not None:
            trace.append(float(np.sum(a / m)))

    return [int(cand[i]) for i in selected]
