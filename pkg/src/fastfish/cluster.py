"""Seeded k-means with k-means++ initialization, shared by the diversity baselines.

Fixed semantics (relied on by tests): at most 100 Lloyd iterations, convergence
when the largest centroid shift drops below 1e-6, assignment ties to the lowest
cluster id, and empty clusters reseeded to the point farthest from its current
center.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidInputError

MAX_ITERS = 100
SHIFT_TOL = 1e-6


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centers.T)
        + np.sum(centers * centers, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of k seed points: first uniform, rest sampled by squared distance."""
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InvalidInputError(f"cannot place {k} centers among {n} points")
    chosen = [int(rng.integers(n))]
    min_d2 = _sq_dists(x, x[chosen[-1]][None, :])[:, 0]
    for _ in range(1, k):
        total = float(min_d2.sum())
        if not np.isfinite(total) or total <= 0.0:
            # All remaining points coincide with a center; fill deterministically.
            leftover = sorted(set(range(n)) - set(chosen))
            chosen.append(leftover[0])
        else:
            chosen.append(int(rng.choice(n, p=min_d2 / total)))
        min_d2 = np.minimum(min_d2, _sq_dists(x, x[chosen[-1]][None, :])[:, 0])
        min_d2[chosen] = 0.0
    return np.asarray(chosen, dtype=np.intp)


def kmeans(x, k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm; returns (labels, centers)."""
    x = np.asarray(x, dtype=np.float64)
    centers = x[kmeans_pp_init(x, k, rng)].copy()
    labels = np.zeros(x.shape[0], dtype=np.intp)
    for _ in range(MAX_ITERS):
        d2 = _sq_dists(x, centers)
        labels = np.argmin(d2, axis=1)
        assigned_d2 = d2[np.arange(x.shape[0]), labels]
        new_centers = centers.copy()
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(assigned_d2))
            labels[far] = j
            assigned_d2[far] = 0.0
            counts = np.bincount(labels, minlength=k)
        for j in range(k):
            members = labels == j
            if np.any(members):
                new_centers[j] = x[members].mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if shift < SHIFT_TOL:
            break
    labels = np.argmin(_sq_dists(x, centers), axis=1)
    return labels, centers
