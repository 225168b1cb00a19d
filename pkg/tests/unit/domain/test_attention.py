from __future__ import annotations

import math

import numpy as np
import pytest

from graphsos.domain.attention import (
    AttentionGrad,
    AttentionParams,
    head_weights,
    init_params,
    multihead_grad,
    multihead_weights,
    sdp_weights,
)
from graphsos.domain.errors import DimensionMismatchError, NonFiniteError


class TestSdpWeights:
    @staticmethod
    def test_two_keys() -> None:
        weights = sdp_weights(np.array([2.0]), [np.array([1.0]), np.array([0.0])], 1)
        assert weights == pytest.approx([0.8808, 0.1192], abs=1e-4)

    @staticmethod
    def test_single_key_gets_all_weight() -> None:
        assert list(sdp_weights(np.array([0.3, -1.0]), [np.array([5.0, 2.0])], 2)) == [1.0]

    @staticmethod
    def test_identical_keys_are_uniform() -> None:
        weights = sdp_weights(np.array([1.0, 2.0]), [np.array([0.5, 0.5])] * 4, 2)
        assert weights == pytest.approx([0.25] * 4)

    @staticmethod
    def test_needs_keys() -> None:
        with pytest.raises(ValueError, match="at least one key"):
            sdp_weights(np.array([1.0]), np.zeros((0, 1)), 1)


class TestMultiheadWeights:
    @staticmethod
    def test_is_the_mean_of_the_heads() -> None:
        rng = np.random.default_rng(3)
        params = init_params(2, 8, 11)
        target, neighbors = rng.normal(size=8), rng.normal(size=(5, 8))
        heads = head_weights(params, target, neighbors)
        assert heads.shape == (2, 5)
        assert np.max(np.abs(multihead_weights(params, target, neighbors) - heads.mean(axis=0))) < 1e-12

    @staticmethod
    def test_weights_form_a_distribution() -> None:
        rng = np.random.default_rng(4)
        weights = multihead_weights(init_params(4, 16, 0), rng.normal(size=16), rng.normal(size=(7, 16)))
        assert np.all(weights > 0)
        assert weights.sum() == pytest.approx(1.0)

    @staticmethod
    def test_target_dimension_must_match() -> None:
        with pytest.raises(DimensionMismatchError):
            multihead_weights(init_params(2, 8, 0), np.zeros(4), np.zeros((2, 8)))


class TestMultiheadGrad:
    @staticmethod
    def test_zero_upstream_gives_zero_gradient() -> None:
        rng = np.random.default_rng(1)
        grad = multihead_grad(init_params(2, 8, 0), rng.normal(size=8), rng.normal(size=(3, 8)), np.zeros(3))
        assert grad.norm == 0.0

    @staticmethod
    def test_matches_finite_differences() -> None:
        rng = np.random.default_rng(5)
        params = init_params(2, 8, 5)
        target, neighbors, upstream = rng.normal(size=8), rng.normal(size=(4, 8)), rng.normal(size=4)

        def objective(w_q: np.ndarray, w_k: np.ndarray) -> float:
            return float(upstream @ multihead_weights(AttentionParams(w_q, w_k), target, neighbors))

        grad = multihead_grad(params, target, neighbors, upstream)
        eps = 1e-5
        analytic, numeric = [], []
        for index in np.ndindex(params.w_q.shape):
            for field in ("w_q", "w_k"):
                plus, minus = params.copy(), params.copy()
                getattr(plus, field)[index] += eps
                getattr(minus, field)[index] -= eps
                numeric.append((objective(plus.w_q, plus.w_k) - objective(minus.w_q, minus.w_k)) / (2 * eps))
                analytic.append(getattr(grad, field)[index])
        assert np.linalg.norm(np.subtract(analytic, numeric)) / np.linalg.norm(numeric) < 1e-4

    @staticmethod
    def test_upstream_must_match_keys() -> None:
        with pytest.raises(DimensionMismatchError):
            multihead_grad(init_params(1, 2, 0), np.ones(2), np.ones((3, 2)), np.ones(2))


class TestParams:
    @staticmethod
    def test_init_params_shape_and_bound() -> None:
        params = init_params(4, 16, 9)
        assert (params.h, params.d, params.d_k) == (4, 16, 4)
        assert params.w_q.shape == (4, 16, 4)
        assert np.max(np.abs(params.w_q)) <= 1 / math.sqrt(16)
        assert np.max(np.abs(params.w_k)) <= 1 / math.sqrt(16)

    @staticmethod
    def test_init_params_is_seeded() -> None:
        assert np.array_equal(init_params(2, 4, 1).w_q, init_params(2, 4, 1).w_q)

    @staticmethod
    @pytest.mark.parametrize(("h", "d"), [(3, 8), (0, 8), (2, 0)])
    def test_heads_must_divide_dimension(h: int, d: int) -> None:
        with pytest.raises(DimensionMismatchError):
            init_params(h, d, 0)

    @staticmethod
    def test_non_finite_entries_are_rejected() -> None:
        w_q = np.zeros((1, 2, 2))
        w_q[0, 0, 0] = np.inf
        with pytest.raises(NonFiniteError):
            AttentionParams(w_q, np.zeros((1, 2, 2)))

    @staticmethod
    def test_copy_is_independent() -> None:
        params = init_params(1, 2, 0)
        clone = params.copy()
        clone.w_q[0, 0, 0] = 9.0
        assert params.w_q[0, 0, 0] != 9.0


def test_grad_arithmetic() -> None:
    grad = AttentionGrad(np.full((1, 2, 2), 1.0), np.full((1, 2, 2), 1.0))
    assert (grad + grad).norm == pytest.approx(2 * grad.norm)
    assert (0.5 * grad).norm == pytest.approx(grad.norm / 2)
    assert grad.is_finite
    assert not AttentionGrad(np.full((1, 2, 2), np.nan), np.zeros((1, 2, 2))).is_finite
