"""Contains the attention-guided random walk, subgraph scores and the construction of scoring data."""
from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import softmax

from .attention import AttentionParams, Matrix, multihead_weights
from .custom_types import NodeId, Vector
from .encoder import EncoderHandle
from .errors import NonFiniteError, UnknownNodeError
from .graph import TextGraph, induced_subgraph, k_hop_neighborhood, node_labels
from .serialization import Ordering, SerializationKind, SerializedGraph, serialize

POSITIVE_THRESHOLD = 0.8
NEGATIVE_THRESHOLD = 0.2


@dataclass(frozen=True)
class SampleConfig:
    """Settings of the subgraph sampler."""

    n_max: int = 20
    k: int = 2
    restart: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate the settings."""
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}.")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}.")


@dataclass(frozen=True)
class SampleStep:
    """One transition of the walk."""

    source: NodeId
    chosen: NodeId
    index: int
    log_prob: float
    candidates: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SampleTrace:
    """A sampled subgraph together with everything needed to differentiate its log-probability."""

    subgraph: TextGraph
    target: NodeId
    steps: tuple[SampleStep, ...]
    neighborhood: tuple[NodeId, ...]
    attention: Vector
    target_embedding: Vector
    neighbor_embeddings: Matrix
    exhausted: bool = False

    @property
    def log_prob(self) -> float:
        """Return the log-probability of the whole walk."""
        return math.fsum(step.log_prob for step in self.steps)


def transition_distribution(weights: Vector, candidates: Sequence[int]) -> Vector:
    """Return the weights of the candidates renormalized to a distribution.

    Candidates whose weights all underflowed to zero are drawn uniformly.
    """
    selected = np.asarray(weights, dtype=np.float64)[list(candidates)]
    total = selected.sum()
    if not np.isfinite(total) or total < 0.0:
        raise NonFiniteError(f"Cannot renormalize weights summing to {total}.")
    if total == 0.0:
        return np.full(len(selected), 1.0 / len(selected))
    return np.asarray(selected / total, dtype=np.float64)


def _embed_nodes(graph: TextGraph, nodes: Sequence[NodeId], encoder: EncoderHandle) -> Matrix:
    if not nodes:
        return np.zeros((0, encoder.dim))
    return np.stack([encoder.embed_node(node, graph[node].text) for node in nodes])


def _candidates(graph: TextGraph, node: NodeId, position: dict[NodeId, int], seen: set[NodeId]) -> tuple[int, ...]:
    return tuple(position[u] for u in graph.neighbors(node) if u in position and u not in seen)


def _walk(
    graph: TextGraph,
    v: NodeId,
    neighborhood: tuple[NodeId, ...],
    weights: Vector,
    cfg: SampleConfig,
    rng: np.random.Generator,
) -> tuple[list[NodeId], list[SampleStep], bool]:
    position = {node: index for index, node in enumerate(neighborhood)}
    visited = [v]
    seen = {v}
    steps: list[SampleStep] = []
    current: Optional[NodeId] = v
    while len(visited) < cfg.n_max:
        assert current is not None
        candidates = _candidates(graph, current, position, seen)
        if not candidates:
            if not cfg.restart:
                return visited, steps, not any(_candidates(graph, node, position, seen) for node in visited)
            if current != v:
                current = v
                continue
            # Stuck at v, so the walk goes on from the earliest visited node that still borders unvisited nodes.
            current = next((node for node in visited if _candidates(graph, node, position, seen)), None)
            if current is None:
                return visited, steps, True
            continue
        probabilities = transition_distribution(weights, candidates)
        pick = min(int(np.searchsorted(np.cumsum(probabilities), rng.random(), side="right")), len(candidates) - 1)
        index = candidates[pick]
        chosen = neighborhood[index]
        steps.append(SampleStep(current, chosen, index, float(np.log(probabilities[pick])), candidates))
        visited.append(chosen)
        seen.add(chosen)
        current = chosen
    return visited, steps, False


def _sample(
    graph: TextGraph,
    v: NodeId,
    weights_of: Optional[tuple[AttentionParams, EncoderHandle]],
    cfg: SampleConfig,
    rng: Optional[np.random.Generator],
) -> SampleTrace:
    if v not in graph:
        raise UnknownNodeError(f"Node {v} not present in graph")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    neighborhood = tuple(sorted(k_hop_neighborhood(graph, v, cfg.k)))
    if weights_of is None:
        target_embedding = np.zeros(0)
        neighbor_embeddings = np.zeros((len(neighborhood), 0))
        weights = np.full(len(neighborhood), 1.0 / len(neighborhood)) if neighborhood else np.zeros(0)
    else:
        params, encoder = weights_of
        target_embedding = encoder.embed_node(v, graph[v].text)
        neighbor_embeddings = _embed_nodes(graph, neighborhood, encoder)
        weights = multihead_weights(params, target_embedding, neighbor_embeddings) if neighborhood else np.zeros(0)
    visited, steps, exhausted = _walk(graph, v, neighborhood, weights, cfg, rng)
    return SampleTrace(
        induced_subgraph(graph, visited),
        v,
        tuple(steps),
        neighborhood,
        weights,
        target_embedding,
        neighbor_embeddings,
        exhausted,
    )


def sample_subgraph(
    graph: TextGraph,
    v: NodeId,
    params: AttentionParams,
    encoder: EncoderHandle,
    cfg: SampleConfig,
    *,
    rng: Optional[np.random.Generator] = None,
) -> SampleTrace:
    """Sample a subgraph around v by a random walk guided by attention against v.

    Transitions from the current node go to its unvisited neighbors inside the k-hop neighborhood of v, with
    probabilities proportional to the attention weights renormalized over those candidates. A walk that gets stuck
    restarts at v if restarts are enabled and stops otherwise. A restarted walk that is stuck at v as well continues
    from the earliest visited node that still has candidates, and the trace is marked exhausted only once no visited
    node has any. Unless an explicit generator is passed the walk draws from a generator seeded with the configured
    seed.
    """
    return _sample(graph, v, (params, encoder), cfg, rng)


def sample_random_subgraph(
    graph: TextGraph, v: NodeId, cfg: SampleConfig, *, rng: Optional[np.random.Generator] = None
) -> SampleTrace:
    """Sample a subgraph around v by the same walk with uniform transition weights."""
    return _sample(graph, v, None, cfg, rng)


def log_prob_upstream(trace: SampleTrace) -> Vector:
    """Return the gradient of the walk's log-probability with respect to the attention weights."""
    upstream = np.zeros(len(trace.attention))
    for step in trace.steps:
        candidates = list(step.candidates)
        mass = trace.attention[candidates].sum()
        if mass == 0.0:
            # uniform fallback, locally constant in the weights
            continue
        upstream[step.index] += 1.0 / trace.attention[step.index]
        upstream[candidates] -= 1.0 / mass
    return upstream


@dataclass(frozen=True)
class ScoreResult:
    """The probability a scorer assigns to a subgraph being of high quality."""

    p1: float
    logits: Optional[tuple[float, float]] = None


def p1_from_logits(l0: float, l1: float) -> ScoreResult:
    """Turn two first-token logits into a score."""
    logits = np.array([l0, l1], dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError(f"Non-finite logits {(l0, l1)}.")
    return ScoreResult(float(softmax(logits)[1]), (float(l0), float(l1)))


def ssm_loss(p1: float, T: float) -> float:  # noqa: N803
    """Return the temperature-scaled squared distance of the score from one."""
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"Score must lie in [0, 1], got {p1}.")
    if T <= 0:
        raise ValueError(f"Temperature must be positive, got {T}.")
    return (1.0 - p1) ** 2 / T


@dataclass(frozen=True)
class ScoringExample:
    """A serialized subgraph labeled as strongly homophilous (1) or strongly heterophilous (0)."""

    serialized: SerializedGraph
    label: int
    homophily: float
    target: NodeId


def _grow(
    graph: TextGraph,
    v: NodeId,
    labels: dict[NodeId, str],
    size: int,
    hops: int,
    prefer_same: bool,
    rng: np.random.Generator,
) -> tuple[list[NodeId], int, int]:
    allowed = k_hop_neighborhood(graph, v, hops)
    chosen = [v]
    members = {v}
    same = total = 0
    while len(chosen) < size:
        frontier = sorted({u for node in chosen for u in graph.neighbors(node) if u in allowed and u not in members})
        if not frontier:
            break
        best: Optional[tuple[float, NodeId, int, int]] = None
        for u in rng.permutation(frontier):
            u = int(u)
            links = [w for w in graph.neighbors(u) if w in members]
            new_same = same + sum(labels[w] == labels[u] for w in links)
            new_total = total + len(links)
            homophily = new_same / new_total if new_total else 0.5
            score = homophily if prefer_same else -homophily
            if best is None or score > best[0]:
                best = (score, u, new_same, new_total)
        assert best is not None
        _, u, same, total = best
        chosen.append(u)
        members.add(u)
    return chosen, same, total


def build_scoring_examples(
    graphs: Sequence[TextGraph],
    count: int = 500,
    seed: int = 0,
    *,
    size: int = 6,
    hops: int = 2,
    max_attempts: Optional[int] = None,
) -> list[ScoringExample]:
    """Build up to count positive and count negative scoring examples by greedy subgraph growth.

    Positives grow by always adding the frontier node that keeps the edge homophily highest and are kept if it
    ends at or above 0.8. Negatives grow towards the lowest homophily and are kept at or below 0.2.
    """
    if count < 1:
        raise ValueError(f"Count must be positive, got {count}.")
    candidates = [(graph, node_labels(graph)) for graph in graphs if graph.edges]
    rng = np.random.default_rng(seed)
    if max_attempts is None:
        max_attempts = 4 * count
    examples: list[ScoringExample] = []
    for label, prefer_same in ((1, True), (0, False)):
        found = 0
        attempts = 0
        while found < count and attempts < max_attempts and candidates:
            attempts += 1
            graph, labels = candidates[int(rng.integers(len(candidates)))]
            v = graph.node_ids[int(rng.integers(len(graph)))]
            chosen, same, total = _grow(graph, v, labels, size, hops, prefer_same, rng)
            if total == 0:
                continue
            homophily = same / total
            if (prefer_same and homophily < POSITIVE_THRESHOLD) or (not prefer_same and homophily > NEGATIVE_THRESHOLD):
                continue
            subgraph = induced_subgraph(graph, chosen)
            kind = SerializationKind.FEATURE_EDGE if subgraph.has_text else SerializationKind.EDGE
            examples.append(ScoringExample(serialize(subgraph, Ordering.identity(subgraph), kind), label, homophily, v))
            found += 1
        if found < count:
            warnings.warn(
                f"Only {found} of {count} {'positive' if prefer_same else 'negative'} scoring examples were feasible.",
                category=UserWarning,
                stacklevel=2,
            )
    return examples
