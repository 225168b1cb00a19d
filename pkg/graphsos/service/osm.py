"""Contains the use-cases of the order selector: training against a frozen model and held-out evaluation."""
from __future__ import annotations

import logging
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from graphsos.domain.attention import AttentionParams
from graphsos.domain.encoder import EncoderHandle
from graphsos.domain.errors import NonFiniteError, TransportError
from graphsos.domain.graph import GraphRecord, TextGraph
from graphsos.domain.optim import TrainingResult, clip_grad_norm, create_optimizer
from graphsos.domain.selection import OrderSelection, build_candidates, select_order, selection_grad
from graphsos.domain.serialization import SerializationKind, SerializedGraph, default_kind
from graphsos.domain.tuning import build_prompt

from .backends import LlmBackend, Prompt, with_retries
from .ssm import StepCallback

logger = logging.getLogger(__name__)

SEED_BOUND = 2**63


@dataclass(frozen=True)
class OsmExample:
    """A graph, a question about it and the answer the frozen model should produce."""

    graph: TextGraph
    question: str
    target: str

    @classmethod
    def from_record(cls, record: GraphRecord) -> OsmExample:
        """Create an example from a graph record carrying a question and an answer."""
        if record.question is None or record.answer is None:
            raise ValueError("Order selection examples need a question and an answer.")
        return cls(record.graph, record.question, record.answer)


class OrderSelector:
    """Chooses the rendering of a graph with trained selector parameters."""

    def __init__(self, params: AttentionParams, encoder: EncoderHandle, m: int, tau: float) -> None:
        """Initialize the selector."""
        self.params = params
        self.encoder = encoder
        self.m = m
        self.tau = tau

    def select(
        self, graph: TextGraph, question: str, kind: SerializationKind, rng: np.random.Generator
    ) -> OrderSelection:
        """Draw m candidate orderings and select one of them."""
        candidates = build_candidates(graph, question, self.m, int(rng.integers(SEED_BOUND)), kind)
        return select_order(candidates, self.params, self.encoder, self.tau, rng)

    def choose(
        self, graph: TextGraph, question: str, kind: SerializationKind, rng: np.random.Generator
    ) -> SerializedGraph:
        """Return the selected rendering."""
        return self.select(graph, question, kind, rng).chosen

    def __repr__(self) -> str:
        """Return a string representation of the selector."""
        return f"{self.__class__.__name__}(m={self.m}, tau={self.tau})"


def _nll(llm: LlmBackend, candidate: SerializedGraph, example: OsmExample) -> float:
    prompt = Prompt(build_prompt(candidate, example.question), example.target, candidate)
    return with_retries(lambda: llm.nll(prompt, example.target))


def train_osm(  # noqa: PLR0913
    params: AttentionParams,
    dataset: Sequence[OsmExample],
    llm: LlmBackend,
    m: int,
    tau: float,
    steps: int,
    lr: float,
    *,
    encoder: EncoderHandle,
    baseline_decay: float = 0.9,
    exact_expectation: bool = False,
    optimizer: str = "adam",
    seed: int = 0,
    kind: Optional[SerializationKind] = None,
    concurrency: int = 4,
    max_grad_norm: float = 1.0,
    on_step: Optional[StepCallback] = None,
) -> TrainingResult:
    """Train the selector to prefer orderings under which the frozen model finds the target likely.

    By default the hard selection is scored and its loss, minus a moving-average baseline, is passed through the
    soft mask (straight-through). With exact expectation every candidate is scored and the soft mask's expected
    loss is differentiated instead.
    """
    if steps < 1:
        raise ValueError(f"Need at least one step, got {steps}.")
    if not dataset:
        raise ValueError("Need at least one training example.")
    rng = np.random.default_rng(seed)
    selector = OrderSelector(params, encoder, m, tau)
    descent = create_optimizer(optimizer, lr)
    baseline: Optional[float] = None
    losses: list[float] = []
    skipped = 0
    logger.info(f"Training selector for {steps} steps on {len(dataset)} examples with m={m}")
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        for step in range(steps):
            example = dataset[int(rng.integers(len(dataset)))]
            selector.params = params
            selection = selector.select(example.graph, example.question, kind or default_kind(example.graph), rng)
            try:
                if exact_expectation:
                    candidates = selection.candidates.candidates
                    nlls = np.array(list(pool.map(lambda candidate: _nll(llm, candidate, example), candidates)))
                    loss = float(np.dot(selection.mask.soft, nlls))
                    grad_soft = nlls
                else:
                    loss = _nll(llm, selection.chosen, example)
                    if baseline is None:
                        baseline = loss
                    grad_soft = (loss - baseline) * selection.mask.one_hot
                    baseline = baseline_decay * baseline + (1.0 - baseline_decay) * loss
            except TransportError as error:
                skipped += 1
                warnings.warn(f"Skipped step {step} after backend failure: {error}", category=UserWarning, stacklevel=2)
                continue
            grad = selection_grad(params, selection, grad_soft)
            if not grad.is_finite:
                raise NonFiniteError(f"Non-finite gradient at step {step} (loss {loss}, weights {selection.weights}).")
            params = descent.step(params, clip_grad_norm(grad, max_grad_norm))
            losses.append(loss)
            logger.debug(f"Step {step}: loss {loss:.6f}, chose candidate {selection.mask.hard}")
            if on_step is not None:
                on_step(step, loss)
    logger.info(f"Finished training selector, {skipped} steps were skipped")
    return TrainingResult(params, tuple(losses), skipped)


def selection_frequency(  # noqa: PLR0913
    params: AttentionParams,
    dataset: Sequence[OsmExample],
    encoder: EncoderHandle,
    m: int,
    tau: float,
    *,
    seed: int = 0,
    kind: Optional[SerializationKind] = None,
    repeats: int = 1,
) -> np.ndarray:
    """Return how often each candidate position is selected over the dataset.

    Position 0 always holds the identity ordering, so its frequency measures how much the selector deviates from
    the order the graph was given in.
    """
    if repeats < 1:
        raise ValueError(f"Need at least one repeat, got {repeats}.")
    rng = np.random.default_rng(seed)
    selector = OrderSelector(params, encoder, m, tau)
    counts = np.zeros(m)
    for _ in range(repeats):
        for example in dataset:
            selection = selector.select(example.graph, example.question, kind or default_kind(example.graph), rng)
            counts[selection.mask.hard] += 1
    total = counts.sum()
    return counts / total if total else counts
