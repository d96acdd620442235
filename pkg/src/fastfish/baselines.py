"""Baseline acquisition strategies: random, margin, badge, typiclust.

All functions return local row indices into the arrays they are given and are
pure functions of their inputs and seed. The harness maps local indices back
to dataset positions.
"""

from __future__ import annotations

import numpy as np

from . import cluster, fisher
from .exceptions import InvalidInputError


def random_select(pool_size: int, batch_size: int, seed) -> list[int]:
    """Uniform sample of ``batch_size`` distinct indices."""
    if batch_size > pool_size:
        raise InvalidInputError("batch size exceeds pool size")
    rng = np.random.default_rng(seed)
    return [int(i) for i in rng.choice(pool_size, size=batch_size, replace=False)]


def margin_select(probs, batch_size: int) -> list[int]:
    """Indices with the smallest gap between the two highest class probabilities.

    Smaller margin means higher uncertainty; ties break toward the smaller
    index. The returned list is ordered most-uncertain first.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] < 2:
        raise InvalidInputError("probability matrix must be 2-D with K >= 2")
    if batch_size > p.shape[0]:
        raise InvalidInputError("batch size exceeds pool size")
    top2 = np.partition(p, p.shape[1] - 2, axis=1)[:, -2:]
    margins = top2[:, 1] - top2[:, 0]
    order = np.lexsort((np.arange(p.shape[0]), margins))
    return [int(i) for i in order[:batch_size]]


def badge_select(features, probs, batch_size: int, seed) -> list[int]:
    """k-means++ seeding in the pseudo-label gradient space.

    The embedding of row n is ``vec((e_yhat - p) h^T)`` with ``yhat`` the
    predicted class. Inner products in that space factor as
    ``<a_i, a_j> * <h_i, h_j>`` with ``a = e_yhat - p``, so distances are
    computed without materializing K*D-dimensional vectors. The first center
    is the embedding of largest norm; subsequent centers are sampled with
    probability proportional to the squared distance to the nearest chosen
    center.
    """
    H, P = fisher.check_matrix_inputs(features, probs)
    n = H.shape[0]
    if batch_size > n:
        raise InvalidInputError("batch size exceeds pool size")
    rng = np.random.default_rng(seed)
    yhat = np.argmax(P, axis=1)
    a = -P.copy()
    a[np.arange(n), yhat] += 1.0
    a_norm2 = np.einsum("nk,nk->n", a, a)
    h_norm2 = np.einsum("nd,nd->n", H, H)
    norm2 = a_norm2 * h_norm2

    chosen = [int(np.argmax(norm2))]
    min_d2 = np.maximum(norm2 + norm2[chosen[0]] - 2.0 * (a @ a[chosen[0]]) * (H @ H[chosen[0]]), 0.0)
    min_d2[chosen] = 0.0
    while len(chosen) < batch_size:
        total = float(min_d2.sum())
        if not np.isfinite(total) or total <= 0.0:
            leftover = sorted(set(range(n)) - set(chosen))
            nxt = leftover[0]
        else:
            nxt = int(rng.choice(n, p=min_d2 / total))
        chosen.append(nxt)
        d2 = np.maximum(norm2 + norm2[nxt] - 2.0 * (a @ a[nxt]) * (H @ H[nxt]), 0.0)
        min_d2 = np.minimum(min_d2, d2)
        min_d2[chosen] = 0.0
    return chosen


def _typicality(dists: np.ndarray, k_nn: int) -> float:
    """Inverse mean distance to the k nearest neighbors (self excluded)."""
    if dists.size == 0:
        return np.inf
    nearest = np.sort(dists)[:k_nn]
    mean = float(nearest.mean())
    return np.inf if mean == 0.0 else 1.0 / mean


def typiclust_select(features, labeled_idx, batch_size: int, k_nn: int = 20, seed=0) -> list[int]:
    """Pick the most typical instance from each of the largest uncovered clusters.

    All rows are clustered into ``len(labeled) + batch_size`` k-means clusters.
    Clusters containing no labeled row are processed largest first; if fewer
    than ``batch_size`` exist, the largest remaining clusters (with at least
    one unlabeled row) fill the gap. Within a cluster, typicality is the
    inverse mean distance to the ``k_nn`` nearest neighbors inside that
    cluster (capped at cluster size - 1; singleton clusters get an infinite
    sentinel and resolve by ascending index).
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError("features must be 2-D")
    if k_nn < 1:
        raise InvalidInputError("k_nn must be >= 1")
    n = x.shape[0]
    labeled = sorted(int(i) for i in labeled_idx)
    if batch_size < 1 or batch_size + len(labeled) > n:
        raise InvalidInputError("batch size plus labeled count exceeds pool size")
    labeled_mask = np.zeros(n, dtype=bool)
    labeled_mask[labeled] = True

    rng = np.random.default_rng(seed)
    k_clusters = len(labeled) + batch_size
    labels, _ = cluster.kmeans(x, k_clusters, rng)

    sizes = np.bincount(labels, minlength=k_clusters)
    covered = np.zeros(k_clusters, dtype=bool)
    covered[np.unique(labels[labeled_mask])] = True
    by_size = sorted(range(k_clusters), key=lambda j: (-sizes[j], j))
    ordered = [j for j in by_size if not covered[j]] + [j for j in by_size if covered[j]]

    picks: list[int] = []
    for j in ordered:
        if len(picks) >= batch_size:
            break
        members = np.flatnonzero(labels == j)
        selectable = members[~labeled_mask[members] & ~np.isin(members, picks)]
        if selectable.size == 0:
            continue
        cap = min(k_nn, members.size - 1)
        pair_d = np.sqrt(_pairwise_sq(x[members]))
        best, best_typ = None, -np.inf
        # Members are in ascending index order, so the first maximum wins ties.
        for local, idx in enumerate(members):
            if idx not in selectable:
                continue
            others = np.delete(pair_d[local], local)
            typ = _typicality(others, cap) if cap >= 1 else np.inf
            if typ > best_typ:
                best, best_typ = int(idx), typ
        if best is not None:
            picks.append(best)
    return picks


def _pairwise_sq(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] - 2.0 * (x @ x.T) + sq[None, :]
    return np.maximum(d2, 0.0)
