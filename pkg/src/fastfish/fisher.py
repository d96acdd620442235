"""Per-instance and pooled Fisher information for a softmax linear classifier head.

All quantities derive from a feature vector ``h`` (length D) and a class
probability vector ``p`` (length K). The information matrix of a single
instance is kept as a low-rank factor ``V`` with ``V @ V.T`` equal to the
materialized matrix, so per-instance storage is ``dim * rank`` instead of
``dim ** 2``:

* exact:    dim = K*D, rank <= K  -- full expectation over classes
* top-c:    dim = K*D, rank <= c  -- expectation restricted to the c most
            probable classes, with the kept probabilities renormalized
* binary:   dim = D,   rank = 1   -- two-class surrogate likelihood on the
            maximum predicted probability
* sampled:  dim = K*D, rank <= s  -- Monte-Carlo estimate of the expectation
* diagonal: main diagonal of the exact matrix, stored as a vector

Class indices are 1-based throughout (labels live in ``1..K``). Flattened
parameter vectors are laid out class-block by class-block: entry
``(y - 1) * D + d`` refers to feature ``d`` of class ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import EmptyPoolError, InvalidInputError

# Probabilities are clamped away from 0/1 before entering Fisher formulas to
# avoid degenerate factors from saturated softmax outputs.
PROB_FLOOR = 1e-12

# Chunk cap (in float64 elements) for stacked factor construction.
_CHUNK_ELEMS = 2_000_000


def _floor_probs(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)


def _check_prob_vector(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise InvalidInputError("probability vector must be 1-D with K >= 2")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("probability vector contains non-finite entries")
    if np.any(p < -1e-12) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise InvalidInputError("probabilities must be nonnegative and sum to 1")
    return p


def _check_feature_vector(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise InvalidInputError("feature vector must be 1-D and nonempty")
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("feature vector contains non-finite entries")
    return h


def check_matrix_inputs(features, probs) -> tuple[np.ndarray, np.ndarray]:
    """Validate aligned (N, D) features and (N, K) probabilities, widened to float64."""
    H = np.ascontiguousarray(features, dtype=np.float64)
    P = np.ascontiguousarray(probs, dtype=np.float64)
    if H.ndim != 2 or P.ndim != 2 or H.shape[0] != P.shape[0]:
        raise InvalidInputError("features and probabilities must be 2-D with matching rows")
    if P.shape[1] < 2:
        raise InvalidInputError("need at least two classes")
    if H.shape[0] == 0:
        return H, P
    if not np.all(np.isfinite(H)):
        raise InvalidInputError("features contain non-finite entries")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("probabilities contain non-finite entries")
    if np.any(P < -1e-12) or np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-9:
        raise InvalidInputError("probability rows must be nonnegative and sum to 1")
    return H, P


def softmax(logits) -> np.ndarray:
    """Exp-normalize logits along the last axis.

    Stabilized by max subtraction, so magnitudes up to 1e4 neither overflow
    nor collapse to NaN.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.shape[-1] < 2:
        raise InvalidInputError("softmax needs at least two classes")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("softmax input contains non-finite entries")
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def class_gradient(h, p, y: int) -> np.ndarray:
    """Gradient of the class-``y`` log likelihood w.r.t. the flattened weights.

    Block ``j`` of the result equals ``(1[j == y] - p_j) * h``.
    """
    h = _check_feature_vector(h)
    p = _floor_probs(_check_prob_vector(p))
    k = p.size
    if not 1 <= y <= k:
        raise IndexError(f"class index {y} outside 1..{k}")
    coeff = -p
    coeff[y - 1] += 1.0
    return np.ravel(coeff[:, None] * h[None, :])


@dataclass(frozen=True)
class FimFactor:
    """Low-rank factor ``V`` of one instance's information matrix ``V @ V.T``."""

    columns: np.ndarray

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def rank(self) -> int:
        return self.columns.shape[1]

    def materialize(self) -> np.ndarray:
        """Dense ``dim x dim`` information matrix."""
        return self.columns @ self.columns.T


@dataclass(frozen=True)
class Exact:
    """Full expectation over all K classes."""


@dataclass(frozen=True)
class TopC:
    """Expectation over the ``c`` most probable classes, renormalized."""

    c: int

    def __post_init__(self):
        if self.c < 1:
            raise InvalidInputError("top-c width must be >= 1")


@dataclass(frozen=True)
class Binary:
    """Two-class surrogate on the maximum predicted probability."""


@dataclass(frozen=True)
class Diagonal:
    """Main diagonal of the exact matrix only."""


@dataclass(frozen=True)
class Sampled:
    """Monte-Carlo estimate with ``s`` label draws per instance."""

    s: int
    seed: int = 0

    def __post_init__(self):
        if self.s < 1:
            raise InvalidInputError("sample count must be >= 1")


FimKind = Union[Exact, TopC, Binary, Diagonal, Sampled]


@dataclass(frozen=True)
class PoolFim:
    """Dense average information matrix over ``count`` instances."""

    matrix: np.ndarray
    count: int


def topc_classes(p, c: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-``c`` class indices (1-based, most probable first) and renormalized weights.

    Ties are broken toward the smaller class index; the returned weights sum
    to one.
    """
    p = _floor_probs(_check_prob_vector(p))
    k = p.size
    if not 1 <= c <= k:
        raise InvalidInputError(f"top-c width {c} outside 1..{k}")
    order = np.argsort(-p, kind="stable")[:c]
    w = p[order]
    return order + 1, w / w.sum()


def fim_exact(h, p) -> FimFactor:
    """Factor of the full-expectation information matrix.

    The materialized product equals both the weighted gradient outer-product
    sum over classes and the Kronecker form ``(diag(p) - p p^T) (x) h h^T``.
    """
    h = _check_feature_vector(h)
    p = _floor_probs(_check_prob_vector(p))
    k, d = p.size, h.size
    coeff = np.eye(k) - p[:, None]  # column y holds e_y - p
    coeff *= np.sqrt(p)[None, :]
    return FimFactor(np.reshape(coeff[:, None, :] * h[None, :, None], (k * d, k)))


def fim_topc(h, p, c: int) -> FimFactor:
    """Factor of the top-``c`` approximation.

    Gradients stay the full multi-class gradients; only the expectation
    weights are restricted to the ``c`` most probable classes and
    renormalized. ``c = K`` recovers the exact factor.
    """
    h = _check_feature_vector(h)
    p = _floor_probs(_check_prob_vector(p))
    classes, weights = topc_classes(p, c)
    k, d = p.size, h.size
    coeff = np.repeat(-p[:, None], len(classes), axis=1)
    coeff[classes - 1, np.arange(len(classes))] += 1.0
    coeff *= np.sqrt(weights)[None, :]
    return FimFactor(np.reshape(coeff[:, None, :] * h[None, :, None], (k * d, len(classes))))


def fim_binary(h, p) -> FimFactor:
    """Rank-1 factor ``sqrt(phat (1 - phat)) * h`` in feature space.

    ``phat`` is the maximum predicted probability; the materialized product
    is the negative expected Hessian of the two-class surrogate likelihood
    whose logit is linear in ``h``.
    """
    h = _check_feature_vector(h)
    p = _floor_probs(_check_prob_vector(p))
    phat = float(p.max())
    return FimFactor((np.sqrt(phat * (1.0 - phat)) * h)[:, None])


def fim_diagonal(h, p) -> np.ndarray:
    """Main diagonal of the exact matrix: entry ``(y-1)*D + d`` is ``(p_y - p_y^2) h_d^2``."""
    h = _check_feature_vector(h)
    p = _floor_probs(_check_prob_vector(p))
    return np.ravel((p - p * p)[:, None] * (h * h)[None, :])


def fim_sampled(h, p, s: int, seed) -> FimFactor:
    """Monte-Carlo factor: columns ``g_y / sqrt(s)`` for ``s`` draws ``y ~ Cat(p)``.

    Deterministic for a fixed seed; unbiased for the exact matrix.
    """
    h = _check_feature_vector(h)
    p = _floor_probs(_check_prob_vector(p))
    if s < 1:
        raise InvalidInputError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    draws = rng.choice(p.size, size=s, p=p / p.sum())
    k, d = p.size, h.size
    coeff = np.repeat(-p[:, None], s, axis=1)
    coeff[draws, np.arange(s)] += 1.0
    coeff /= np.sqrt(s)
    return FimFactor(np.reshape(coeff[:, None, :] * h[None, :, None], (k * d, s)))


def instance_factor(h, p, kind: FimKind) -> FimFactor:
    """Single-instance factor for any non-diagonal kind."""
    if isinstance(kind, Exact):
        return fim_exact(h, p)
    if isinstance(kind, TopC):
        return fim_topc(h, p, kind.c)
    if isinstance(kind, Binary):
        return fim_binary(h, p)
    if isinstance(kind, Sampled):
        return fim_sampled(h, p, kind.s, kind.seed)
    raise InvalidInputError(f"no factor representation for kind {kind!r}")


# -- vectorized builders shared by pooling, selection, and benchmarks --------


def binary_factor_matrix(H, P) -> np.ndarray:
    """Stacked rank-1 binary factors, one row per instance: (N, D)."""
    pmax = P.max(axis=1)
    np.clip(pmax, PROB_FLOOR, 1.0 - PROB_FLOOR, out=pmax)
    return H * np.sqrt(pmax * (1.0 - pmax))[:, None]


def multiclass_factor_stack(H, P, c: int | None = None) -> np.ndarray:
    """Stacked factors in flattened-weight space: (N, K*D, r).

    ``c = None`` builds exact factors (r = K); otherwise top-``c`` factors
    (r = c) with renormalized weights. Ties in the top-``c`` cut go to the
    smaller class index.
    """
    n, d = H.shape
    k = P.shape[1]
    P = _floor_probs(P)
    if c is None:
        coeff = np.broadcast_to(np.eye(k)[None], (n, k, k)) - P[:, :, None]
        coeff = coeff * np.sqrt(P)[:, None, :]
        r = k
    else:
        if not 1 <= c <= k:
            raise InvalidInputError(f"top-c width {c} outside 1..{k}")
        order = np.argsort(-P, axis=1, kind="stable")[:, :c]
        w = np.take_along_axis(P, order, axis=1)
        w = w / w.sum(axis=1, keepdims=True)
        coeff = np.repeat(-P[:, :, None], c, axis=2)
        coeff[np.arange(n)[:, None], order, np.arange(c)[None, :]] += 1.0
        coeff *= np.sqrt(w)[:, None, :]
        r = c
    return np.reshape(coeff[:, :, None, :] * H[:, None, :, None], (n, k * d, r))


def diagonal_entry_matrix(H, P) -> np.ndarray:
    """Stacked diagonal entries, one row per instance: (N, K*D)."""
    P = _floor_probs(P)
    n = H.shape[0]
    return np.reshape((P - P * P)[:, :, None] * (H * H)[:, None, :], (n, -1))


def _sampled_factor(h, p, s, seed_seq) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    p = _floor_probs(p)
    draws = rng.choice(p.size, size=s, p=p / p.sum())
    coeff = np.repeat(-p[:, None], s, axis=1)
    coeff[draws, np.arange(s)] += 1.0
    coeff /= np.sqrt(s)
    return np.reshape(coeff[:, None, :] * h[None, :, None], (p.size * h.size, s))


def pool_fim(features, probs, kind: FimKind) -> PoolFim:
    """Average information matrix over a set of instances, densified.

    The diagonal kind returns its diagonal embedded in a dense matrix.
    Accumulation uses stacked matrix products whose reduction is pairwise,
    so instance order perturbs the result only at the 1e-12 level.
    """
    H, P = check_matrix_inputs(features, probs)
    n, d = H.shape
    k = P.shape[1]
    if n == 0:
        raise EmptyPoolError("cannot pool an empty instance set")
    if isinstance(kind, Binary):
        F = binary_factor_matrix(H, P)
        mat = F.T @ F / n
    elif isinstance(kind, Diagonal):
        mat = np.diag(diagonal_entry_matrix(H, P).mean(axis=0))
    elif isinstance(kind, Sampled):
        dim = k * d
        mat = np.zeros((dim, dim))
        children = np.random.SeedSequence(kind.seed).spawn(n)
        for i in range(n):
            f = _sampled_factor(H[i], P[i], kind.s, children[i])
            mat += f @ f.T
        mat /= n
    elif isinstance(kind, (Exact, TopC)):
        c = kind.c if isinstance(kind, TopC) else None
        r = c if c is not None else k
        dim = k * d
        chunk = max(1, _CHUNK_ELEMS // max(dim * r, 1))
        parts = []
        for start in range(0, n, chunk):
            F = multiclass_factor_stack(H[start : start + chunk], P[start : start + chunk], c)
            flat = np.swapaxes(F, 1, 2).reshape(-1, dim)
            parts.append(flat.T @ flat)
        mat = np.sum(parts, axis=0) / n
    else:
        raise InvalidInputError(f"unsupported pooling kind {kind!r}")
    return PoolFim((mat + mat.T) / 2.0, n)
