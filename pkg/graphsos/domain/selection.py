"""Contains the Gumbel-softmax selection among candidate serialization orders."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import softmax

from .attention import AttentionGrad, AttentionParams, Matrix, multihead_grad, multihead_weights
from .custom_types import Vector
from .encoder import EncoderHandle
from .errors import NonFiniteError
from .graph import TextGraph
from .serialization import SerializationKind, SerializedGraph, gen_orderings, serialize

_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class OrderCandidateSet:
    """Differently ordered renderings of one graph competing for a question."""

    candidates: tuple[SerializedGraph, ...]
    question: str

    def __post_init__(self) -> None:
        """Check that there is at least one candidate."""
        if not self.candidates:
            raise ValueError("A candidate set needs at least one candidate.")

    @property
    def m(self) -> int:
        """Return the number of candidates."""
        return len(self.candidates)


@dataclass(frozen=True, eq=False)
class GumbelMask:
    """A relaxed and a hard selection of one of m candidates."""

    soft: Vector
    hard: int
    tau: float
    noise: Vector

    @property
    def one_hot(self) -> Vector:
        """Return the hard selection as a one-hot vector."""
        mask = np.zeros(len(self.soft))
        mask[self.hard] = 1.0
        return mask


def gumbel_noise(m: int, rng: np.random.Generator) -> Vector:
    """Draw m independent standard Gumbel variables."""
    uniform = np.clip(rng.random(m), _TINY, None)
    return np.asarray(-np.log(-np.log(uniform)), dtype=np.float64)


def gumbel_softmax(
    logits: Vector, tau: float, rng: np.random.Generator, *, noise: Optional[Vector] = None
) -> GumbelMask:
    """Perturb the logits with Gumbel noise and return their tempered softmax and its argmax."""
    logits = np.asarray(logits, dtype=np.float64)
    if tau <= 0:
        raise ValueError(f"Temperature must be positive, got {tau}.")
    if logits.ndim != 1 or len(logits) == 0:
        raise ValueError("Need at least one logit.")
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError(f"Non-finite logits {logits!r}.")
    if noise is None:
        noise = gumbel_noise(len(logits), rng)
    soft = np.asarray(softmax((logits + noise) / tau), dtype=np.float64)
    return GumbelMask(soft, int(np.argmax(soft)), tau, noise)


def build_candidates(
    graph: TextGraph, question: str, m: int, seed: int, kind: SerializationKind
) -> OrderCandidateSet:
    """Render the graph under m orderings, the first of which is the identity."""
    return OrderCandidateSet(
        tuple(serialize(graph, ordering, kind) for ordering in gen_orderings(graph, m, seed)), question
    )


@dataclass(frozen=True, eq=False)
class OrderSelection:
    """The outcome of selecting one candidate ordering."""

    chosen: SerializedGraph
    mask: GumbelMask
    weights: Vector
    question_embedding: Vector
    candidate_embeddings: Matrix
    candidates: OrderCandidateSet


def select_order(
    cands: OrderCandidateSet,
    params: AttentionParams,
    encoder: EncoderHandle,
    tau: float,
    rng: np.random.Generator,
) -> OrderSelection:
    """Cross-attend the question against the candidates and pick one with Gumbel-softmax."""
    question_embedding = encoder.embed(cands.question)
    candidate_embeddings = encoder.embed_many([candidate.text for candidate in cands.candidates])
    weights = multihead_weights(params, question_embedding, candidate_embeddings)
    mask = gumbel_softmax(np.log(np.maximum(weights, _TINY)), tau, rng)
    return OrderSelection(
        cands.candidates[mask.hard], mask, weights, question_embedding, candidate_embeddings, cands
    )


def selection_upstream(selection: OrderSelection, grad_soft: Vector) -> Vector:
    """Chain a gradient with respect to the soft mask back to the attention weights."""
    soft = selection.mask.soft
    grad_soft = np.asarray(grad_soft, dtype=np.float64)
    grad_logits = (soft * grad_soft - soft * np.dot(soft, grad_soft)) / selection.mask.tau
    return np.asarray(grad_logits / np.maximum(selection.weights, _TINY), dtype=np.float64)


def selection_grad(params: AttentionParams, selection: OrderSelection, grad_soft: Vector) -> AttentionGrad:
    """Return the gradient of a loss on the soft mask with respect to the attention parameters."""
    return multihead_grad(
        params,
        selection.question_embedding,
        selection.candidate_embeddings,
        selection_upstream(selection, grad_soft),
    )
