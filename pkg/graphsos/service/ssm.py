"""Contains the use-cases of the subgraph sampler: scoring, training and evaluation."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from graphsos.domain.attention import AttentionParams, multihead_grad
from graphsos.domain.custom_types import NodeId
from graphsos.domain.encoder import EncoderHandle
from graphsos.domain.errors import NonFiniteError, UndefinedMetricError
from graphsos.domain.graph import TextGraph, node_labels, same_class_neighbor_proportion
from graphsos.domain.optim import TrainingResult, clip_grad_norm, create_optimizer
from graphsos.domain.sampling import (
    SampleConfig,
    SampleTrace,
    ScoreResult,
    log_prob_upstream,
    p1_from_logits,
    sample_random_subgraph,
    sample_subgraph,
    ssm_loss,
)
from graphsos.domain.serialization import Ordering, SerializationKind, SerializedGraph, serialize

from .backends import ScoringOracle

logger = logging.getLogger(__name__)

Sampler = Callable[[TextGraph, NodeId, np.random.Generator], SampleTrace]
StepCallback = Callable[[int, Optional[float]], None]


def score_subgraph(serialized: SerializedGraph, oracle: ScoringOracle) -> ScoreResult:
    """Score a rendered subgraph with the oracle's two logits."""
    l0, l1 = oracle.logits(serialized)
    return p1_from_logits(l0, l1)


def serialize_subgraph(subgraph: TextGraph) -> SerializedGraph:
    """Render a sampled subgraph in the identity ordering."""
    kind = SerializationKind.FEATURE_EDGE if subgraph.has_text else SerializationKind.EDGE
    return serialize(subgraph, Ordering.identity(subgraph), kind)


def _walkable_targets(graphs: Sequence[TextGraph]) -> list[tuple[TextGraph, list[NodeId]]]:
    return [
        (graph, [node for node in graph.node_ids if graph.neighbors(node)])
        for graph in graphs
        if any(graph.neighbors(node) for node in graph.node_ids)
    ]


def train_ssm(  # noqa: PLR0913
    params: AttentionParams,
    graphs: Sequence[TextGraph],
    oracle: ScoringOracle,
    cfg: SampleConfig,
    steps: int,
    lr: float,
    baseline_decay: float = 0.9,
    *,
    encoder: EncoderHandle,
    T: float = 5.0,  # noqa: N803
    optimizer: str = "adam",
    max_grad_norm: float = 1.0,
    on_step: Optional[StepCallback] = None,
) -> TrainingResult:
    """Train the sampler's attention with a score-function estimator and a moving-average baseline.

    Every step samples one walk around a random target, rewards it with the negative loss of the oracle's score
    and pushes the walk's log-probability up or down by the reward's advantage over the baseline.
    """
    if steps < 1:
        raise ValueError(f"Need at least one step, got {steps}.")
    if not 0.0 <= baseline_decay < 1.0:
        raise ValueError(f"Baseline decay must lie in [0, 1), got {baseline_decay}.")
    targets = _walkable_targets(graphs)
    if not targets:
        raise ValueError("None of the graphs has an edge to walk along.")
    rng = np.random.default_rng(cfg.seed)
    descent = create_optimizer(optimizer, lr)
    baseline: Optional[float] = None
    losses: list[float] = []
    skipped = 0
    logger.info(f"Training sampler for {steps} steps on {len(targets)} graphs")
    for step in range(steps):
        graph, nodes = targets[int(rng.integers(len(targets)))]
        v = nodes[int(rng.integers(len(nodes)))]
        trace = sample_subgraph(graph, v, params, encoder, cfg, rng=rng)
        if not trace.steps:
            skipped += 1
            continue
        loss = ssm_loss(score_subgraph(serialize_subgraph(trace.subgraph), oracle.for_graph(graph)).p1, T)
        reward = -loss
        if baseline is None:
            baseline = reward
        advantage = reward - baseline
        baseline = baseline_decay * baseline + (1.0 - baseline_decay) * reward
        grad = multihead_grad(
            params, trace.target_embedding, trace.neighbor_embeddings, -advantage * log_prob_upstream(trace)
        )
        if not grad.is_finite:
            raise NonFiniteError(
                f"Non-finite gradient at step {step} (target {v}, reward {reward}, baseline {baseline}, "
                f"{len(trace.steps)} walk steps)."
            )
        params = descent.step(params, clip_grad_norm(grad, max_grad_norm))
        losses.append(loss)
        logger.debug(f"Step {step}: loss {loss:.6f}, advantage {advantage:.6f}")
        if on_step is not None:
            on_step(step, loss)
    logger.info(f"Finished training sampler, {skipped} steps without a walk were skipped")
    return TrainingResult(params, tuple(losses), skipped)


def ssm_sampler(params: AttentionParams, encoder: EncoderHandle, cfg: SampleConfig) -> Sampler:
    """Return a sampler walking with the given attention parameters."""

    def sample(graph: TextGraph, v: NodeId, rng: np.random.Generator) -> SampleTrace:
        return sample_subgraph(graph, v, params, encoder, cfg, rng=rng)

    return sample


def random_sampler(cfg: SampleConfig) -> Sampler:
    """Return a sampler walking with uniform weights."""

    def sample(graph: TextGraph, v: NodeId, rng: np.random.Generator) -> SampleTrace:
        return sample_random_subgraph(graph, v, cfg, rng=rng)

    return sample


@dataclass(frozen=True)
class SamplerEvaluation:
    """Mean properties of subgraphs sampled around a set of targets."""

    same_class: float
    size: float
    evaluated: int


def evaluate_sampler(
    graph: TextGraph, targets: Sequence[NodeId], sampler: Sampler, *, seed: int = 0
) -> SamplerEvaluation:
    """Return the mean same-class proportion and size of subgraphs sampled around the targets.

    The walk around the i-th target draws from a generator seeded with (seed, i), so two samplers evaluated with
    the same seed are paired. Targets whose subgraph holds no other node are left out of the proportion.
    """
    labels = node_labels(graph)
    proportions: list[float] = []
    sizes: list[int] = []
    for index, target in enumerate(targets):
        trace = sampler(graph, target, np.random.default_rng([seed, index]))
        sizes.append(len(trace.subgraph))
        if len(trace.subgraph) > 1:
            proportions.append(same_class_neighbor_proportion(trace.subgraph, target, labels))
    if not proportions:
        raise UndefinedMetricError("No sampled subgraph holds a node besides its target.")
    return SamplerEvaluation(float(np.mean(proportions)), float(np.mean(sizes)), len(proportions))


def sweep_n_max(  # noqa: PLR0913
    graph: TextGraph,
    targets: Sequence[NodeId],
    params: AttentionParams,
    encoder: EncoderHandle,
    values: Sequence[int],
    *,
    k: int = 2,
    seed: int = 0,
) -> list[tuple[int, SamplerEvaluation]]:
    """Evaluate the sampler for every maximum subgraph size."""
    return [
        (n_max, evaluate_sampler(graph, targets, ssm_sampler(params, encoder, SampleConfig(n_max, k)), seed=seed))
        for n_max in values
    ]
