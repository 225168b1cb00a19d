"""Contains all domain events."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .grading import TrialResult, TrialStats
    from .graph import TextGraph
    from .optim import TrainingResult
    from .sampling import SampleTrace, ScoringExample
    from .selection import OrderSelection
    from .tuning import PreferenceRecord, SftExample


class Processes(Enum):
    """Long-running processes reporting their progress."""

    TRAIN_SSM = auto()
    TRAIN_OSM = auto()
    DISTILL = auto()
    BENCH = auto()


@dataclass(frozen=True)
class Event:
    """Base class for all events."""


@dataclass(frozen=True)
class BatchProcessingStarted(Event):
    """A process over a known number of steps started."""

    process: Processes
    total: int


@dataclass(frozen=True)
class StepFinished(Event):
    """One step of a process finished."""

    process: Processes
    step: int
    loss: Optional[float] = None


@dataclass(frozen=True)
class BatchProcessingFinished(Event):
    """A process finished all of its steps."""

    process: Processes


@dataclass(frozen=True)
class GraphsSerialized(Event):
    """Input graphs have been rendered."""

    texts: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class SubgraphsSampled(Event):
    """Subgraphs have been sampled around target nodes."""

    traces: tuple[SampleTrace, ...]


@dataclass(frozen=True, eq=False)
class OrdersSelected(Event):
    """A serialization order has been selected for each input."""

    selections: tuple[OrderSelection, ...]


@dataclass(frozen=True, eq=False)
class SsmTrained(Event):
    """The subgraph sampler finished training."""

    result: TrainingResult


@dataclass(frozen=True, eq=False)
class OsmTrained(Event):
    """The order selector finished training."""

    result: TrainingResult


@dataclass(frozen=True)
class CotDataBuilt(Event):
    """The SFT and DPO datasets have been assembled."""

    sft: tuple[SftExample, ...]
    dpo: tuple[PreferenceRecord, ...]
    dropped: int
    skipped: int


@dataclass(frozen=True)
class OrderTrialsRun(Event):
    """The order-sensitivity trials finished."""

    results: tuple[TrialResult, ...]
    stats: TrialStats
    sweep: tuple[tuple[int, TrialStats], ...] = ()


@dataclass(frozen=True)
class MetricsComputed(Event):
    """Graph metrics have been computed."""

    rows: tuple[tuple[str, float], ...]


@dataclass(frozen=True, eq=False)
class ScoringDataBuilt(Event):
    """Scoring-model training data has been built."""

    examples: tuple[ScoringExample, ...]


@dataclass(frozen=True, eq=False)
class GraphGenerated(Event):
    """A synthetic graph has been generated."""

    graph: TextGraph
