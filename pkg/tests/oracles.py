"""Independent brute-force oracles used to freeze expected values.

Everything here is written from the defining formulas with plain loops and
dense inversions, deliberately sharing no code with the package internals.
"""

from __future__ import annotations

import numpy as np


def log_softmax_grad_fd(h, p, y, eps=1e-6):
    """Finite-difference gradient of ln softmax(W h)_y w.r.t. the entries of W.

    W is reconstructed so that softmax(W h) reproduces p exactly.
    """
    h = np.asarray(h, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    k, d = p.size, h.size
    w0 = np.outer(np.log(p), h) / float(h @ h)

    def f(w):
        z = w @ h
        z = z - z.max()
        return z[y - 1] - np.log(np.exp(z).sum())

    grad = np.zeros((k, d))
    for i in range(k):
        for j in range(d):
            wp, wm = w0.copy(), w0.copy()
            wp[i, j] += eps
            wm[i, j] -= eps
            grad[i, j] = (f(wp) - f(wm)) / (2 * eps)
    return grad.ravel()


def gradient(h, p, y):
    """Closed-form per-class gradient, built entry by entry."""
    h = np.asarray(h, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    g = np.zeros(p.size * h.size)
    for j in range(p.size):
        indicator = 1.0 if (j + 1) == y else 0.0
        for dd in range(h.size):
            g[j * h.size + dd] = (indicator - p[j]) * h[dd]
    return g


def fim_exact(h, p):
    """Brute-force sum over classes of p_y * g_y g_y^T."""
    p = np.asarray(p, dtype=np.float64)
    dim = p.size * np.asarray(h).size
    out = np.zeros((dim, dim))
    for y in range(1, p.size + 1):
        g = gradient(h, p, y)
        out += p[y - 1] * np.outer(g, g)
    return out


def fim_exact_kron(h, p):
    """Kronecker closed form (diag(p) - p p^T) (x) h h^T."""
    h = np.asarray(h, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    return np.kron(np.diag(p) - np.outer(p, p), np.outer(h, h))


def topc_weights(p, c):
    """Top-c class indices (1-based) and renormalized weights, ties to lower index."""
    p = np.asarray(p, dtype=np.float64)
    order = sorted(range(p.size), key=lambda i: (-p[i], i))[:c]
    w = p[order]
    return [i + 1 for i in order], w / w.sum()


def fim_topc(h, p, c):
    classes, weights = topc_weights(p, c)
    dim = np.asarray(p).size * np.asarray(h).size
    out = np.zeros((dim, dim))
    for y, w in zip(classes, weights):
        g = gradient(h, p, y)
        out += w * np.outer(g, g)
    return out


def fim_binary(h, p):
    h = np.asarray(h, dtype=np.float64)
    phat = float(np.max(p))
    return phat * (1.0 - phat) * np.outer(h, h)


def fim_diagonal(h, p):
    return np.diag(fim_exact(h, p)).copy()


def materialized(h, p, kind, c=2):
    if kind == "exact":
        return fim_exact(h, p)
    if kind == "topc":
        return fim_topc(h, p, c)
    if kind == "binary":
        return fim_binary(h, p)
    if kind == "diag":
        return np.diag(fim_diagonal(h, p))
    raise ValueError(kind)


def _instance_matrices(H, P, kind, c):
    return [materialized(H[i], P[i], kind, c) for i in range(len(H))]


def dense_greedy(H, P, labeled, candidates, batch_size, kind, lam=1.0, c=2, forward_backward=True):
    """Full-inversion greedy reference for the trace objective.

    Returns (chosen indices in forward order, objective values after init and
    after every update/removal).
    """
    H = np.asarray(H, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    labeled = list(labeled)
    candidates = list(candidates)
    all_idx = labeled + candidates
    target = np.mean(_instance_matrices(H[all_idx], P[all_idx], kind, c), axis=0)
    dim = target.shape[0]
    m = lam * np.eye(dim)
    if labeled:
        m = m + np.mean(_instance_matrices(H[labeled], P[labeled], kind, c), axis=0)
    cand_fims = _instance_matrices(H[candidates], P[candidates], kind, c)

    def objective(mat):
        return float(np.trace(np.linalg.inv(mat) @ target))

    trace = [objective(m)]
    chosen: list[int] = []
    available = list(range(len(candidates)))
    n_forward = min(2 * batch_size, len(candidates)) if forward_backward else batch_size
    for _ in range(n_forward):
        objs = [objective(m + cand_fims[i]) for i in available]
        best = available[int(np.argmin(objs))]
        m = m + cand_fims[best]
        chosen.append(best)
        available.remove(best)
        trace.append(objective(m))
    while len(chosen) > batch_size:
        objs = [objective(m - cand_fims[i]) for i in chosen]
        drop = int(np.argmin(objs))
        m = m - cand_fims[chosen[drop]]
        chosen.pop(drop)
        trace.append(objective(m))
    return [candidates[i] for i in chosen], trace


def loss_grad_fd(weights, bias, X, y, weight_decay, eps=1e-6):
    """Central finite differences of mean NLL + (wd/2)||W||^2 over all parameters."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)

    def loss(w, b):
        logits = X @ w.T + b
        z = logits - logits.max(axis=1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        nll = -np.mean(logp[np.arange(len(y)), y - 1])
        return nll + 0.5 * weight_decay * np.sum(w * w)

    gw = np.zeros_like(weights)
    for i in range(weights.shape[0]):
        for j in range(weights.shape[1]):
            wp, wm = weights.copy(), weights.copy()
            wp[i, j] += eps
            wm[i, j] -= eps
            gw[i, j] = (loss(wp, bias) - loss(wm, bias)) / (2 * eps)
    gb = np.zeros_like(bias)
    for i in range(bias.size):
        bp, bm = bias.copy(), bias.copy()
        bp[i] += eps
        bm[i] -= eps
        gb[i] = (loss(weights, bp) - loss(weights, bm)) / (2 * eps)
    return gw, gb
