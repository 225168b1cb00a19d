"""Contains code handling domain commands and events."""
from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Optional

import numpy as np

from graphsos.domain import commands, events
from graphsos.domain.attention import init_params
from graphsos.domain.encoder import EncoderHandle
from graphsos.domain.events import Processes
from graphsos.domain.grading import TrialStats
from graphsos.domain.graph import GraphRecord, edge_homophily, same_class_neighbor_proportion
from graphsos.domain.sampling import build_scoring_examples
from graphsos.domain.serialization import Ordering, default_kind, random_ordering, serialize
from graphsos.domain.synth import synth_planted_graph
from graphsos.domain.tuning import build_dpo_dataset, build_sft_dataset

from .backends import ChatEndpoint, LlmBackend, ScoringOracle
from .bench import run_order_trials, sweep_m
from .distill import distill
from .gateway import DatasetGateway, ParamsGateway
from .messagebus import MessageBus
from .osm import OrderSelector, OsmExample, train_osm
from .progress import ProgressDisplay
from .ssm import StepCallback, random_sampler, ssm_sampler, train_ssm


def _report_steps(process: Processes, message_bus: MessageBus) -> StepCallback:
    def on_step(step: int, loss: Optional[float]) -> None:
        message_bus.handle(events.StepFinished(process, step, loss))

    return on_step


def _questioned(records: Sequence[GraphRecord]) -> list[GraphRecord]:
    for index, record in enumerate(records):
        if record.question is None:
            raise ValueError(f"Record {index} has no question.")
    return list(records)


def serialize_graphs(
    command: commands.SerializeGraphs,
    *,
    dataset: DatasetGateway,
    output_port: Callable[[events.GraphsSerialized], None],
) -> None:
    """Render every graph in the identity ordering or in an ordering drawn from the seed."""
    rng = None if command.seed is None else np.random.default_rng(command.seed)
    texts = []
    for record in dataset.records():
        ordering = Ordering.identity(record.graph) if rng is None else random_ordering(record.graph, rng)
        texts.append(serialize(record.graph, ordering, command.kind or default_kind(record.graph)).text)
    output_port(events.GraphsSerialized(tuple(texts)))


def sample_subgraphs(
    command: commands.SampleSubgraph,
    *,
    dataset: DatasetGateway,
    params: Optional[ParamsGateway],
    encoder: EncoderHandle,
    output_port: Callable[[events.SubgraphsSampled], None],
) -> None:
    """Sample a subgraph around the target of every graph, with uniform weights if there are no parameters."""
    sampler = random_sampler(command.cfg) if params is None else ssm_sampler(params.load(), encoder, command.cfg)
    rng = np.random.default_rng(command.cfg.seed)
    traces = []
    for index, record in enumerate(dataset.records()):
        target = command.target if command.target is not None else record.target
        if target is None:
            raise ValueError(f"Record {index} has no target node and none was given.")
        traces.append(sampler(record.graph, target, rng))
    output_port(events.SubgraphsSampled(tuple(traces)))


def select_orders(
    command: commands.SelectOrder,
    *,
    dataset: DatasetGateway,
    params: ParamsGateway,
    encoder: EncoderHandle,
    output_port: Callable[[events.OrdersSelected], None],
) -> None:
    """Select an ordering for every graph and its question."""
    selector = OrderSelector(params.load(), encoder, command.m, command.tau)
    rng = np.random.default_rng(command.seed)
    selections = []
    for record in _questioned(dataset.records()):
        assert record.question is not None
        kind = command.kind or default_kind(record.graph)
        selections.append(selector.select(record.graph, record.question, kind, rng))
    output_port(events.OrdersSelected(tuple(selections)))


def train_sampler(
    command: commands.TrainSsm,
    *,
    dataset: DatasetGateway,
    params: ParamsGateway,
    oracle: ScoringOracle,
    encoder: EncoderHandle,
    message_bus: MessageBus,
    output_port: Callable[[events.SsmTrained], None],
) -> None:
    """Train the subgraph sampler from freshly initialized parameters and store the result."""
    initial = init_params(command.heads, encoder.dim, command.seed)
    message_bus.handle(events.BatchProcessingStarted(Processes.TRAIN_SSM, command.steps))
    result = train_ssm(
        initial,
        [record.graph for record in dataset.records()],
        oracle,
        command.cfg,
        command.steps,
        command.lr,
        command.baseline_decay,
        encoder=encoder,
        T=command.T,
        optimizer=command.optimizer,
        on_step=_report_steps(Processes.TRAIN_SSM, message_bus),
    )
    message_bus.handle(events.BatchProcessingFinished(Processes.TRAIN_SSM))
    params.save(result.params)
    output_port(events.SsmTrained(result))


def train_selector(
    command: commands.TrainOsm,
    *,
    dataset: DatasetGateway,
    params: ParamsGateway,
    llm: LlmBackend,
    encoder: EncoderHandle,
    concurrency: int,
    message_bus: MessageBus,
    output_port: Callable[[events.OsmTrained], None],
) -> None:
    """Train the order selector from freshly initialized parameters and store the result."""
    examples = [OsmExample.from_record(record) for record in dataset.records()]
    initial = init_params(command.heads, encoder.dim, command.seed)
    message_bus.handle(events.BatchProcessingStarted(Processes.TRAIN_OSM, command.steps))
    result = train_osm(
        initial,
        examples,
        llm,
        command.m,
        command.tau,
        command.steps,
        command.lr,
        encoder=encoder,
        baseline_decay=command.baseline_decay,
        exact_expectation=command.exact_expectation,
        optimizer=command.optimizer,
        seed=command.seed,
        kind=command.kind,
        concurrency=concurrency,
        on_step=_report_steps(Processes.TRAIN_OSM, message_bus),
    )
    message_bus.handle(events.BatchProcessingFinished(Processes.TRAIN_OSM))
    params.save(result.params)
    output_port(events.OsmTrained(result))


def build_cot_data(
    command: commands.BuildCotData,
    *,
    dataset: DatasetGateway,
    endpoint: ChatEndpoint,
    concurrency: int,
    message_bus: MessageBus,
    output_port: Callable[[events.CotDataBuilt], None],
) -> None:
    """Distill Graph-CoT answers and assemble the SFT and DPO datasets from them."""
    records = dataset.records()
    message_bus.handle(events.BatchProcessingStarted(Processes.DISTILL, len(records)))
    distilled = distill(
        records,
        endpoint,
        temperature=command.temperature,
        max_tokens=command.max_tokens,
        kind=command.kind,
        concurrency=concurrency,
        on_step=_report_steps(Processes.DISTILL, message_bus),
    )
    message_bus.handle(events.BatchProcessingFinished(Processes.DISTILL))
    pairs, skipped = build_dpo_dataset(distilled.records)
    output_port(
        events.CotDataBuilt(tuple(build_sft_dataset(distilled.records)), tuple(pairs), distilled.dropped, skipped)
    )


def run_trials(
    command: commands.RunOrderTrials,
    *,
    dataset: DatasetGateway,
    llm: LlmBackend,
    encoder: EncoderHandle,
    params: Optional[ParamsGateway],
    concurrency: int,
    message_bus: MessageBus,
    output_port: Callable[[events.OrderTrialsRun], None],
) -> None:
    """Run the order-sensitivity trials, routing orderings through the selector if asked to."""
    records = dataset.records()
    selector = None
    if command.use_selector or command.m_sweep:
        if params is None:
            raise ValueError("Routing trials through the selector needs trained parameters.")
        selector = OrderSelector(params.load(), encoder, command.m, command.tau)
    message_bus.handle(events.BatchProcessingStarted(Processes.BENCH, command.trials))
    results, stats = run_order_trials(
        records,
        llm,
        command.trials,
        command.base_seed,
        command.kind,
        labels=command.labels,
        pin_identity_first=command.pin_identity_first,
        selector=selector if command.use_selector else None,
        concurrency=concurrency,
        on_step=_report_steps(Processes.BENCH, message_bus),
    )
    message_bus.handle(events.BatchProcessingFinished(Processes.BENCH))
    sweep: list[tuple[int, TrialStats]] = []
    if command.m_sweep:
        assert selector is not None
        sweep = sweep_m(
            records,
            llm,
            selector,
            command.m_sweep,
            command.trials,
            command.base_seed,
            command.kind,
            labels=command.labels,
            concurrency=concurrency,
        )
    output_port(events.OrderTrialsRun(tuple(results), stats, tuple(sweep)))


def compute_metrics(
    command: commands.ComputeMetrics,
    *,
    dataset: DatasetGateway,
    output_port: Callable[[events.MetricsComputed], None],
) -> None:
    """Compute the requested metrics of every graph."""
    rows: list[tuple[str, float]] = []
    for record in dataset.records():
        if command.homophily:
            rows.append(("edge_homophily", edge_homophily(record.graph)))
        if command.same_class_target is not None:
            proportion = same_class_neighbor_proportion(record.graph, command.same_class_target)
            rows.append(("same_class_proportion", proportion))
    output_port(events.MetricsComputed(tuple(rows)))


def build_scoring_data(
    command: commands.BuildScoringData,
    *,
    dataset: DatasetGateway,
    output_port: Callable[[events.ScoringDataBuilt], None],
) -> None:
    """Build scoring-model training data from the labeled graphs."""
    graphs = [record.graph for record in dataset.records()]
    output_port(events.ScoringDataBuilt(tuple(build_scoring_examples(graphs, command.count, command.seed))))


def generate_graph(command: commands.GenerateGraph, *, output_port: Callable[[events.GraphGenerated], None]) -> None:
    """Generate a synthetic labeled graph."""
    graph = synth_planted_graph(
        command.n, command.classes, command.target_h, command.seed, mean_degree=command.mean_degree
    )
    output_port(events.GraphGenerated(graph))


def inform_batch_processing_started(event: events.BatchProcessingStarted, *, display: ProgressDisplay) -> None:
    """Inform the user that batch processing started."""
    display.start(event.process, event.total)


def inform_step_finished(event: events.StepFinished, *, display: ProgressDisplay) -> None:
    """Inform the user that the next step finished."""
    display.advance(event.step, event.loss)


def inform_batch_processing_finished(event: events.BatchProcessingFinished, *, display: ProgressDisplay) -> None:
    """Inform the user that batch processing finished."""
    display.stop()
