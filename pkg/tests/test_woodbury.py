"""Tests for the incremental inverse accumulator and its trace gain."""

import numpy as np
import pytest

from fastfish import fisher
from fastfish.exceptions import InvalidInputError, NumericalError
from fastfish.fisher import FimFactor, PoolFim
from fastfish.woodbury import BaitState, initial_state, woodbury_gain, woodbury_update


def make_state(dim, lam=1.0, rng=None, labeled=None):
    target = np.eye(dim) if rng is None else _random_psd(rng, dim)
    return initial_state(PoolFim(target, count=1), lam, labeled)


def _random_psd(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim))
    return scale * (a @ a.T) / dim


class TestGain:
    def test_scalar_sherman_morrison(self):
        state = make_state(1)
        gain = woodbury_gain(state, FimFactor(np.array([[1.0]])))
        assert abs(gain - 0.5) < 1e-12
        updated = woodbury_update(state, FimFactor(np.array([[1.0]])))
        assert abs(updated.objective() - 0.5) < 1e-12
        assert abs(state.objective() - gain - updated.objective()) < 1e-12

    def test_zero_factor_zero_gain(self):
        state = make_state(3)
        assert woodbury_gain(state, FimFactor(np.zeros((3, 2)))) == 0.0

    def test_matches_dense_difference(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = _random_psd(rng, 4)
            m = _random_psd(rng, 4) + np.eye(4)
            v = rng.standard_normal((4, 2))
            state = BaitState(
                m_inverse=np.linalg.inv(m), pool_target=PoolFim(a, count=1), lam=1.0
            )
            gain = woodbury_gain(state, FimFactor(v))
            dense = np.trace(np.linalg.inv(m) @ a) - np.trace(np.linalg.inv(m + v @ v.T) @ a)
            assert abs(gain - dense) < 1e-8

    def test_dimension_mismatch(self):
        state = make_state(3)
        with pytest.raises(InvalidInputError):
            woodbury_gain(state, FimFactor(np.ones((2, 1))))


class TestUpdate:
    def test_identity_rank_one(self):
        state = make_state(1)
        updated = woodbury_update(state, FimFactor(np.array([[1.0]])))
        np.testing.assert_allclose(updated.m_inverse, [[0.5]], atol=1e-12)

    def test_update_then_downdate_roundtrip(self):
        rng = np.random.default_rng(1)
        state = make_state(5, rng=rng)
        v = FimFactor(rng.standard_normal((5, 2)))
        there = woodbury_update(state, v, index=7)
        back = woodbury_update(there, v, index=7, downdate=True)
        assert there.selected == [7] and back.selected == []
        np.testing.assert_allclose(back.m_inverse, state.m_inverse, atol=1e-9)

    def test_sequence_matches_direct_inversion(self):
        rng = np.random.default_rng(2)
        dim = 6
        state = make_state(dim, rng=rng)
        accumulated = np.eye(dim)
        for i in range(5):
            v = rng.standard_normal((dim, 2))
            state = woodbury_update(state, FimFactor(v), index=i)
            accumulated = accumulated + v @ v.T
        np.testing.assert_allclose(state.m_inverse, np.linalg.inv(accumulated), atol=1e-8)
        assert state.selected == list(range(5))

    def test_downdate_indefinite_raises(self):
        state = make_state(2, lam=0.5)
        huge = FimFactor(np.array([[10.0], [0.0]]))
        with pytest.raises(NumericalError, match="indefinite"):
            woodbury_update(state, huge, downdate=True)

    def test_state_invariants_after_updates(self):
        rng = np.random.default_rng(3)
        state = make_state(4, rng=rng, labeled=_random_psd(rng, 4))
        for i in range(4):
            state = woodbury_update(state, FimFactor(rng.standard_normal((4, 1))), index=i)
        assert np.abs(state.m_inverse - state.m_inverse.T).max() < 1e-9
        np.linalg.cholesky(state.m_inverse)  # positive definite
        assert len(set(state.selected)) == len(state.selected)

    def test_initial_state_requires_positive_lambda(self):
        with pytest.raises(InvalidInputError):
            initial_state(PoolFim(np.eye(2), count=1), 0.0)


class TestAgainstFisherFactors:
    def test_gain_consistency_with_pool(self):
        rng = np.random.default_rng(4)
        H = rng.standard_normal((10, 3))
        P = fisher.softmax(rng.standard_normal((10, 3)))
        pool = fisher.pool_fim(H, P, fisher.Binary())
        state = initial_state(pool, lam=1.0)
        factor = fisher.fim_binary(H[0], P[0])
        gain = woodbury_gain(state, factor)
        m = np.eye(3) + factor.materialize()
        dense = np.trace(pool.matrix) - np.trace(np.linalg.inv(m) @ pool.matrix)
        assert abs(gain - dense) < 1e-10
