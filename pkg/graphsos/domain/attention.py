"""Contains scaled dot-product and multi-head cross-attention weights and their gradients."""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt
from scipy.special import softmax

from .custom_types import Vector
from .errors import DimensionMismatchError, NonFiniteError

Matrix = npt.NDArray[np.float64]
Keys = Union[Matrix, Sequence[Vector]]


@dataclass(frozen=True, eq=False)
class AttentionParams:
    """Per-head query and key projections, each stored as an array of shape (h, d, d/h)."""

    w_q: Matrix
    w_k: Matrix

    def __post_init__(self) -> None:
        """Validate the shapes and entries of the projections."""
        if self.w_q.ndim != 3 or self.w_q.shape != self.w_k.shape:
            raise DimensionMismatchError(f"Projection shapes {self.w_q.shape} and {self.w_k.shape} do not match.")
        if self.h * self.d_k != self.d:
            raise DimensionMismatchError(f"Per-head width {self.d_k} times {self.h} heads is not {self.d}.")
        if not (np.all(np.isfinite(self.w_q)) and np.all(np.isfinite(self.w_k))):
            raise NonFiniteError("Attention parameters contain non-finite entries.")

    @property
    def h(self) -> int:
        """Return the number of heads."""
        return int(self.w_q.shape[0])

    @property
    def d(self) -> int:
        """Return the input dimension."""
        return int(self.w_q.shape[1])

    @property
    def d_k(self) -> int:
        """Return the per-head dimension."""
        return int(self.w_q.shape[2])

    def copy(self) -> AttentionParams:
        """Return a deep copy of the parameters."""
        return AttentionParams(self.w_q.copy(), self.w_k.copy())

    def __repr__(self) -> str:
        """Return a string representation of the parameters."""
        return f"{self.__class__.__name__}(h={self.h}, d={self.d})"


@dataclass(frozen=True, eq=False)
class AttentionGrad:
    """The gradient of a scalar with respect to the query and key projections."""

    w_q: Matrix
    w_k: Matrix

    @classmethod
    def zeros_like(cls, params: AttentionParams) -> AttentionGrad:
        """Return a zero gradient shaped like the parameters."""
        return cls(np.zeros_like(params.w_q), np.zeros_like(params.w_k))

    @property
    def norm(self) -> float:
        """Return the global Euclidean norm of the gradient."""
        return float(math.sqrt(np.sum(self.w_q**2) + np.sum(self.w_k**2)))

    @property
    def is_finite(self) -> bool:
        """Return True if every entry is finite."""
        return bool(np.all(np.isfinite(self.w_q)) and np.all(np.isfinite(self.w_k)))

    def __add__(self, other: AttentionGrad) -> AttentionGrad:
        """Add two gradients."""
        return AttentionGrad(self.w_q + other.w_q, self.w_k + other.w_k)

    def __mul__(self, factor: float) -> AttentionGrad:
        """Scale the gradient."""
        return AttentionGrad(self.w_q * factor, self.w_k * factor)

    __rmul__ = __mul__


def init_params(h: int, d: int, seed: int) -> AttentionParams:
    """Draw projections uniformly from [-1/sqrt(d), 1/sqrt(d)]."""
    if h < 1 or d < 1 or d % h:
        raise DimensionMismatchError(f"Dimension {d} is not divisible into {h} heads.")
    rng = np.random.default_rng(seed)
    bound = 1.0 / math.sqrt(d)
    w_q = rng.uniform(-bound, bound, size=(h, d, d // h))
    w_k = rng.uniform(-bound, bound, size=(h, d, d // h))
    return AttentionParams(w_q, w_k)


def _as_keys(keys: Keys, dim: int) -> Matrix:
    matrix = np.asarray(keys, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ValueError("Attention needs at least one key.")
    if matrix.shape[1] != dim:
        raise DimensionMismatchError(f"Keys of dimension {matrix.shape[1]} do not match dimension {dim}.")
    return matrix


def sdp_weights(q: Vector, keys: Keys, d_k: int) -> Vector:
    """Return softmax(q . k / sqrt(d_k)) over the keys."""
    query = np.asarray(q, dtype=np.float64)
    matrix = _as_keys(keys, len(query))
    return np.asarray(softmax(matrix @ query / math.sqrt(d_k)), dtype=np.float64)


@dataclass(frozen=True, eq=False)
class _Forward:
    query: Vector
    keys: Matrix
    a: Matrix
    b: Matrix
    scores: Matrix


def _forward(params: AttentionParams, target: Vector, neighbors: Keys) -> _Forward:
    query = np.asarray(target, dtype=np.float64)
    if query.shape != (params.d,):
        raise DimensionMismatchError(f"Target of shape {query.shape} does not match dimension {params.d}.")
    keys = _as_keys(neighbors, params.d)
    a = np.einsum("d,hdk->hk", query, params.w_q)
    b = np.einsum("nd,hdk->hnk", keys, params.w_k)
    scores = softmax(np.einsum("hnk,hk->hn", b, a) / math.sqrt(params.d_k), axis=1)
    return _Forward(query, keys, a, b, scores)


def head_weights(params: AttentionParams, target: Vector, neighbors: Keys) -> Matrix:
    """Return the attention weights of every head as rows."""
    return _forward(params, target, neighbors).scores


def multihead_weights(params: AttentionParams, target: Vector, neighbors: Keys) -> Vector:
    """Return the average of the heads' attention weights over the neighbors."""
    return np.asarray(head_weights(params, target, neighbors).mean(axis=0), dtype=np.float64)


def multihead_grad(params: AttentionParams, target: Vector, neighbors: Keys, upstream: Vector) -> AttentionGrad:
    """Back-propagate a gradient with respect to the averaged weights into the projections."""
    forward = _forward(params, target, neighbors)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (forward.keys.shape[0],):
        raise DimensionMismatchError(
            f"Upstream of shape {upstream.shape} does not match {forward.keys.shape[0]} keys."
        )
    per_head = upstream / params.h
    scores = forward.scores
    grad_scores = scores * (per_head - np.sum(scores * per_head, axis=1, keepdims=True))
    scale = math.sqrt(params.d_k)
    grad_a = np.einsum("hn,hnk->hk", grad_scores, forward.b) / scale
    grad_b = np.einsum("hn,hk->hnk", grad_scores, forward.a) / scale
    return AttentionGrad(
        np.einsum("d,hk->hdk", forward.query, grad_a),
        np.einsum("nd,hnk->hdk", forward.keys, grad_b),
    )
