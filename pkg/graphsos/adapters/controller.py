"""Contains code controlling the execution of use-cases."""
from __future__ import annotations

from collections.abc import Iterable
from typing import Optional

from graphsos.domain import commands
from graphsos.domain.custom_types import NodeId
from graphsos.domain.sampling import SampleConfig
from graphsos.domain.serialization import SerializationKind
from graphsos.service.messagebus import MessageBus


def _kind(name: Optional[str]) -> Optional[SerializationKind]:
    return None if name is None else SerializationKind(name)


class CliController:
    """Controls the execution of use-cases from the command line."""

    def __init__(self, message_bus: MessageBus) -> None:
        """Initialize the controller."""
        self._message_bus = message_bus

    def serialize(self, kind: Optional[str] = None, seed: Optional[int] = None) -> None:
        """Execute the serialize use-case."""
        self._message_bus.handle(commands.SerializeGraphs(_kind(kind), seed))

    def sample(self, n_max: int, k: int, seed: int, target: Optional[NodeId] = None) -> None:
        """Execute the sample use-case."""
        self._message_bus.handle(commands.SampleSubgraph(SampleConfig(n_max, k, seed=seed), target))

    def select_order(self, m: int, tau: float, seed: int, kind: Optional[str] = None) -> None:
        """Execute the select-order use-case."""
        self._message_bus.handle(commands.SelectOrder(m, tau, seed, _kind(kind)))

    def train_ssm(  # noqa: PLR0913
        self,
        *,
        n_max: int,
        k: int,
        steps: int,
        lr: float,
        T: float,  # noqa: N803
        baseline_decay: float,
        optimizer: str,
        heads: int,
        seed: int,
    ) -> None:
        """Execute the train-ssm use-case."""
        self._message_bus.handle(
            commands.TrainSsm(SampleConfig(n_max, k, seed=seed), steps, lr, T, baseline_decay, optimizer, heads, seed)
        )

    def train_osm(  # noqa: PLR0913
        self,
        *,
        m: int,
        tau: float,
        steps: int,
        lr: float,
        baseline_decay: float,
        exact_expectation: bool,
        optimizer: str,
        heads: int,
        seed: int,
        kind: Optional[str] = None,
    ) -> None:
        """Execute the train-osm use-case."""
        self._message_bus.handle(
            commands.TrainOsm(
                m, tau, steps, lr, baseline_decay, exact_expectation, optimizer, heads, seed, _kind(kind)
            )
        )

    def build_cot_data(self, temperature: float, max_tokens: int, kind: Optional[str] = None) -> None:
        """Execute the cot-build use-case."""
        self._message_bus.handle(commands.BuildCotData(temperature, max_tokens, _kind(kind)))

    def bench_order(  # noqa: PLR0913
        self,
        *,
        trials: int,
        seed: int,
        labels: Iterable[str] = (),
        pin_identity_first: bool = False,
        use_selector: bool = False,
        m: int = 10,
        tau: float = 0.5,
        m_sweep: Iterable[int] = (),
        kind: Optional[str] = None,
    ) -> None:
        """Execute the bench-order use-case."""
        self._message_bus.handle(
            commands.RunOrderTrials(
                trials,
                seed,
                tuple(labels),
                pin_identity_first,
                use_selector,
                m,
                tau,
                tuple(m_sweep),
                _kind(kind),
            )
        )

    def metrics(self, *, homophily: bool = False, same_class_target: Optional[NodeId] = None) -> None:
        """Execute the metrics use-case."""
        self._message_bus.handle(commands.ComputeMetrics(homophily, same_class_target))

    def scoring_data(self, count: int, seed: int) -> None:
        """Execute the scoring-data use-case."""
        self._message_bus.handle(commands.BuildScoringData(count, seed))

    def synth(self, n: int, classes: int, target_h: float, seed: int, mean_degree: float = 4.0) -> None:
        """Execute the synth use-case."""
        self._message_bus.handle(commands.GenerateGraph(n, classes, target_h, seed, mean_degree))
