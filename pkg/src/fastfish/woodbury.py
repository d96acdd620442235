"""Incremental maintenance of a regularized inverse accumulator under low-rank updates.

The greedy selector keeps ``minv = (lam * I + M)^{-1}`` where ``M`` accumulates
instance information matrices. Adding (or removing) one instance changes ``M``
by ``V @ V.T`` for its factor ``V``, and the inverse is refreshed with the
rank-r inversion identity instead of a fresh O(dim^3) inversion:

    (M + V V^T)^{-1} = M^{-1} - M^{-1} V (I + V^T M^{-1} V)^{-1} V^T M^{-1}

The matching trace gain against a pool target ``A`` is
``tr(M^{-1} V (I + V^T M^{-1} V)^{-1} V^T M^{-1} A)``, which is exactly the
decrease of ``tr(M^{-1} A)`` caused by the update.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError, NumericalError
from .fisher import FimFactor, PoolFim


@dataclass
class BaitState:
    """State of one greedy selection run.

    ``m_inverse`` is the inverse of ``lam * I + M`` for the accumulator ``M``
    of already-counted instances; ``pool_target`` is the averaged information
    matrix the trace objective is evaluated against; ``selected`` records the
    chosen indices in order.
    """

    m_inverse: np.ndarray
    pool_target: PoolFim
    lam: float
    selected: list[int] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.m_inverse.shape[0]

    def objective(self) -> float:
        """Current value of tr(m_inverse @ pool_target)."""
        return float(np.sum(self.m_inverse * self.pool_target.matrix))


def initial_state(pool_target: PoolFim, lam: float, labeled_fim: np.ndarray | None = None) -> BaitState:
    """Inverse of ``lam * I + labeled_fim`` (zero matrix when no labeled pool)."""
    if lam <= 0:
        raise InvalidInputError("regularizer must be positive")
    dim = pool_target.matrix.shape[0]
    m = lam * np.eye(dim)
    if labeled_fim is not None:
        if labeled_fim.shape != (dim, dim):
            raise InvalidInputError("labeled accumulator dimension mismatch")
        m = m + labeled_fim
    minv = np.linalg.inv(m)
    return BaitState(m_inverse=(minv + minv.T) / 2.0, pool_target=pool_target, lam=lam)


def _check_factor(state: BaitState, factor: FimFactor) -> np.ndarray:
    v = np.asarray(factor.columns, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != state.dim:
        raise InvalidInputError(
            f"factor dimension {v.shape} does not match state dimension {state.dim}"
        )
    if v.shape[1] < 1:
        raise InvalidInputError("factor must have at least one column")
    return v


def woodbury_gain(state: BaitState, factor: FimFactor) -> float:
    """Decrease of tr(M^{-1} A) caused by adding ``factor`` to the accumulator."""
    v = _check_factor(state, factor)
    u = state.m_inverse @ v
    s = np.eye(v.shape[1]) + v.T @ u
    w = u.T @ state.pool_target.matrix @ u
    try:
        x = np.linalg.solve(s, w)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"inner rank-r system is singular: {exc}") from exc
    return float(np.trace(x))


def lowrank_inverse_update(minv: np.ndarray, v: np.ndarray, *, subtract: bool = False) -> np.ndarray:
    """Apply ``(M +/- V V^T)^{-1}`` to an explicit inverse, returning a new matrix."""
    u = minv @ v
    r = v.shape[1]
    core = v.T @ u
    if subtract:
        s = np.eye(r) - core
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError as exc:
            eigmin = float(np.linalg.eigvalsh(s).min())
            raise NumericalError(
                "downdate would make the accumulator indefinite "
                f"(inner-system minimum eigenvalue {eigmin:.3e})"
            ) from exc
        out = minv + u @ np.linalg.solve(s, u.T)
    else:
        s = np.eye(r) + core
        try:
            out = minv - u @ np.linalg.solve(s, u.T)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"inner rank-r system is singular: {exc}") from exc
    return (out + out.T) / 2.0


def woodbury_update(
    state: BaitState,
    factor: FimFactor,
    index: int | None = None,
    *,
    downdate: bool = False,
) -> BaitState:
    """New state with ``factor`` added to (or removed from) the accumulator.

    ``index`` is recorded in (or removed from) the selected list when given.
    Downdating a factor that was never added can leave the accumulator
    indefinite, which raises ``NumericalError``.
    """
    v = _check_factor(state, factor)
    minv = lowrank_inverse_update(state.m_inverse, v, subtract=downdate)
    selected = list(state.selected)
    if index is not None:
        if downdate:
            selected.remove(index)
        else:
            selected.append(index)
    return BaitState(
        m_inverse=minv,
        pool_target=state.pool_target,
        lam=state.lam,
        selected=selected,
    )
