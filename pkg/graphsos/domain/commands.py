"""Contains all domain commands."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .custom_types import NodeId
from .sampling import SampleConfig
from .serialization import SerializationKind


@dataclass(frozen=True)
class Command:
    """Base class for all commands."""


@dataclass(frozen=True)
class SerializeGraphs(Command):
    """Render every input graph, in the identity ordering if no seed is given."""

    kind: Optional[SerializationKind] = None
    seed: Optional[int] = None


@dataclass(frozen=True)
class SampleSubgraph(Command):
    """Sample a subgraph around the target node of every input graph."""

    cfg: SampleConfig
    target: Optional[NodeId] = None


@dataclass(frozen=True)
class SelectOrder(Command):
    """Select a serialization order for every input graph and question."""

    m: int
    tau: float
    seed: int
    kind: Optional[SerializationKind] = None


@dataclass(frozen=True)
class TrainSsm(Command):
    """Train the subgraph sampler against a scoring oracle."""

    cfg: SampleConfig
    steps: int
    lr: float
    T: float  # noqa: N815
    baseline_decay: float
    optimizer: str
    heads: int
    seed: int


@dataclass(frozen=True)
class TrainOsm(Command):
    """Train the order selector against a frozen language model."""

    m: int
    tau: float
    steps: int
    lr: float
    baseline_decay: float
    exact_expectation: bool
    optimizer: str
    heads: int
    seed: int
    kind: Optional[SerializationKind] = None


@dataclass(frozen=True)
class BuildCotData(Command):
    """Distill Graph-CoT answers and assemble the SFT and DPO datasets."""

    temperature: float
    max_tokens: int
    kind: Optional[SerializationKind] = None


@dataclass(frozen=True)
class RunOrderTrials(Command):
    """Measure how answers change across randomly permuted serializations."""

    trials: int
    base_seed: int
    labels: tuple[str, ...] = ()
    pin_identity_first: bool = False
    use_selector: bool = False
    m: int = 10
    tau: float = 0.5
    m_sweep: tuple[int, ...] = ()
    kind: Optional[SerializationKind] = None


@dataclass(frozen=True)
class ComputeMetrics(Command):
    """Compute graph metrics for every input graph."""

    homophily: bool = False
    same_class_target: Optional[NodeId] = None


@dataclass(frozen=True)
class BuildScoringData(Command):
    """Grow strongly homophilous and strongly heterophilous subgraphs as scoring-model training data."""

    count: int
    seed: int


@dataclass(frozen=True)
class GenerateGraph(Command):
    """Generate a labeled graph with a planted homophily level."""

    n: int
    classes: int
    target_h: float
    seed: int
    mean_degree: float = 4.0
