from __future__ import annotations

from functools import partial
from typing import Callable, Generic, Optional, TypeVar

import numpy as np
import pytest

from graphsos.adapters.mock import VALID_COT, MockLlm, create_mock_chat, parse_mock_spec
from graphsos.adapters.oracles import HomophilyOracle
from graphsos.domain import commands, events
from graphsos.domain.attention import init_params
from graphsos.domain.encoder import BuiltinEncoder
from graphsos.domain.events import Processes
from graphsos.domain.graph import GraphRecord, edge_homophily
from graphsos.domain.sampling import SampleConfig
from graphsos.domain.serialization import SerializationKind
from graphsos.service.handlers import (
    build_cot_data,
    build_scoring_data,
    compute_metrics,
    generate_graph,
    run_trials,
    sample_subgraphs,
    select_orders,
    serialize_graphs,
    train_sampler,
    train_selector,
)
from graphsos.service.messagebus import CommandHandlers, EventHandlers, MessageBus
from tests.graphs import create_question_records, create_triangle, create_two_cliques, create_two_node_graph

from .gateway import FakeDatasetGateway, FakeParamsGateway

T = TypeVar("T", bound=events.Event)


class FakeOutputPort(Generic[T]):
    def __init__(self) -> None:
        self._response: Optional[T] = None

    @property
    def response(self) -> T:
        assert self._response is not None
        return self._response

    def __call__(self, response: T) -> None:
        self._response = response


class EventRecorder:
    def __init__(self) -> None:
        self.events: list[events.Event] = []

    def __call__(self, event: events.Event) -> None:
        self.events.append(event)

    def processes(self) -> list[tuple[str, Processes]]:
        return [
            (type(event).__name__, event.process)
            for event in self.events
            if isinstance(event, (events.BatchProcessingStarted, events.BatchProcessingFinished))
        ]

    def steps(self) -> int:
        return sum(isinstance(event, events.StepFinished) for event in self.events)


def create_bus(recorder: Optional[EventRecorder] = None) -> tuple[MessageBus, CommandHandlers]:
    command_handlers: CommandHandlers = {}
    event_handlers: EventHandlers = {}
    handlers = [recorder if recorder is not None else (lambda event: None)]
    event_handlers[events.BatchProcessingStarted] = handlers
    event_handlers[events.StepFinished] = handlers
    event_handlers[events.BatchProcessingFinished] = handlers
    return MessageBus(command_handlers, event_handlers), command_handlers


def create_serialize_service(
    records: list[GraphRecord],
) -> tuple[Callable[[commands.SerializeGraphs], None], FakeOutputPort[events.GraphsSerialized]]:
    bus, command_handlers = create_bus()
    output_port: FakeOutputPort[events.GraphsSerialized] = FakeOutputPort()
    command_handlers[commands.SerializeGraphs] = partial(
        serialize_graphs, dataset=FakeDatasetGateway(records), output_port=output_port
    )
    return bus.handle, output_port


class TestSerializeGraphs:
    @staticmethod
    def test_identity_rendering() -> None:
        serialize, output_port = create_serialize_service([GraphRecord(create_two_node_graph())])
        serialize(commands.SerializeGraphs())
        assert output_port.response.texts == ("Feature List: [Node 0: A | Node 1: B], Edge List: [(0, 1)]",)

    @staticmethod
    def test_explicit_kind() -> None:
        serialize, output_port = create_serialize_service([GraphRecord(create_two_node_graph())])
        serialize(commands.SerializeGraphs(SerializationKind.EDGE))
        assert output_port.response.texts == ("Edge List: [(0, 1)]",)

    @staticmethod
    def test_seeded_rendering_is_reproducible() -> None:
        records = create_question_records(3)
        first, first_port = create_serialize_service(records)
        second, second_port = create_serialize_service(records)
        first(commands.SerializeGraphs(seed=7))
        second(commands.SerializeGraphs(seed=7))
        assert first_port.response.texts == second_port.response.texts


class TestSampleSubgraphs:
    @staticmethod
    def create_service(
        records: list[GraphRecord], params: Optional[FakeParamsGateway] = None
    ) -> tuple[Callable[[commands.SampleSubgraph], None], FakeOutputPort[events.SubgraphsSampled]]:
        bus, command_handlers = create_bus()
        output_port: FakeOutputPort[events.SubgraphsSampled] = FakeOutputPort()
        command_handlers[commands.SampleSubgraph] = partial(
            sample_subgraphs,
            dataset=FakeDatasetGateway(records),
            params=params,
            encoder=BuiltinEncoder(8),
            output_port=output_port,
        )
        return bus.handle, output_port

    @staticmethod
    @pytest.mark.parametrize("params", [None, FakeParamsGateway(init_params(2, 8, 0))])
    def test_samples_around_record_targets(params: Optional[FakeParamsGateway]) -> None:
        sample, output_port = TestSampleSubgraphs.create_service(create_question_records(2), params)
        sample(commands.SampleSubgraph(SampleConfig(n_max=3)))
        assert [len(trace.subgraph) for trace in output_port.response.traces] == [3, 3]
        assert all(0 in trace.subgraph for trace in output_port.response.traces)

    @staticmethod
    def test_explicit_target_overrides_record() -> None:
        sample, output_port = TestSampleSubgraphs.create_service(create_question_records(1))
        sample(commands.SampleSubgraph(SampleConfig(n_max=1), target=4))
        assert output_port.response.traces[0].subgraph.node_ids == (4,)

    @staticmethod
    def test_needs_a_target() -> None:
        sample, _ = TestSampleSubgraphs.create_service([GraphRecord(create_triangle())])
        with pytest.raises(ValueError, match="no target"):
            sample(commands.SampleSubgraph(SampleConfig()))


def test_select_orders() -> None:
    bus, command_handlers = create_bus()
    output_port: FakeOutputPort[events.OrdersSelected] = FakeOutputPort()
    command_handlers[commands.SelectOrder] = partial(
        select_orders,
        dataset=FakeDatasetGateway(create_question_records(2)),
        params=FakeParamsGateway(init_params(2, 8, 0)),
        encoder=BuiltinEncoder(8),
        output_port=output_port,
    )
    bus.handle(commands.SelectOrder(m=4, tau=0.5, seed=0))
    selections = output_port.response.selections
    assert len(selections) == 2
    assert all(selection.candidates.m == 4 for selection in selections)


def test_select_orders_needs_questions() -> None:
    bus, command_handlers = create_bus()
    command_handlers[commands.SelectOrder] = partial(
        select_orders,
        dataset=FakeDatasetGateway([GraphRecord(create_triangle())]),
        params=FakeParamsGateway(init_params(2, 8, 0)),
        encoder=BuiltinEncoder(8),
        output_port=FakeOutputPort(),
    )
    with pytest.raises(ValueError, match="no question"):
        bus.handle(commands.SelectOrder(m=4, tau=0.5, seed=0))


def test_train_sampler_stores_parameters_and_reports_progress() -> None:
    recorder = EventRecorder()
    bus, command_handlers = create_bus(recorder)
    params = FakeParamsGateway()
    output_port: FakeOutputPort[events.SsmTrained] = FakeOutputPort()
    command_handlers[commands.TrainSsm] = partial(
        train_sampler,
        dataset=FakeDatasetGateway([GraphRecord(create_two_cliques())]),
        params=params,
        oracle=HomophilyOracle(),
        encoder=BuiltinEncoder(8),
        message_bus=bus,
        output_port=output_port,
    )
    bus.handle(commands.TrainSsm(SampleConfig(n_max=3), 4, 0.05, 5.0, 0.9, "adam", 2, 0))
    assert params.saved == [output_port.response.result.params]
    assert params.saved[0].h == 2
    assert recorder.processes() == [
        ("BatchProcessingStarted", Processes.TRAIN_SSM),
        ("BatchProcessingFinished", Processes.TRAIN_SSM),
    ]
    assert recorder.steps() == output_port.response.result.steps == 4


def test_train_selector() -> None:
    recorder = EventRecorder()
    bus, command_handlers = create_bus(recorder)
    params = FakeParamsGateway()
    output_port: FakeOutputPort[events.OsmTrained] = FakeOutputPort()
    command_handlers[commands.TrainOsm] = partial(
        train_selector,
        dataset=FakeDatasetGateway(create_question_records(3)),
        params=params,
        llm=MockLlm(parse_mock_spec("mock:prefer-identity")),
        encoder=BuiltinEncoder(8),
        concurrency=2,
        message_bus=bus,
        output_port=output_port,
    )
    bus.handle(commands.TrainOsm(4, 0.5, 3, 0.05, 0.9, False, "adam", 2, 0))
    assert len(params.saved) == 1
    assert output_port.response.result.steps == 3
    assert recorder.steps() == 3


def test_build_cot_data() -> None:
    bus, command_handlers = create_bus()
    output_port: FakeOutputPort[events.CotDataBuilt] = FakeOutputPort()
    command_handlers[commands.BuildCotData] = partial(
        build_cot_data,
        dataset=FakeDatasetGateway(create_question_records(2)),
        endpoint=create_mock_chat("mock:valid"),
        concurrency=2,
        message_bus=bus,
        output_port=output_port,
    )
    bus.handle(commands.BuildCotData(0.9, 512))
    response = output_port.response
    assert [example.answer for example in response.sft] == ["alpha", "alpha"]
    assert [(pair.y_w, pair.y_l) for pair in response.dpo] == [(VALID_COT, "alpha")] * 2
    assert (response.dropped, response.skipped) == (0, 0)


class TestRunTrials:
    @staticmethod
    def create_service(
        spec: str, params: Optional[FakeParamsGateway] = None
    ) -> tuple[Callable[[commands.RunOrderTrials], None], FakeOutputPort[events.OrderTrialsRun]]:
        bus, command_handlers = create_bus()
        output_port: FakeOutputPort[events.OrderTrialsRun] = FakeOutputPort()
        command_handlers[commands.RunOrderTrials] = partial(
            run_trials,
            dataset=FakeDatasetGateway(create_question_records(2)),
            llm=MockLlm(parse_mock_spec(spec)),
            encoder=BuiltinEncoder(8),
            params=params,
            concurrency=2,
            message_bus=bus,
            output_port=output_port,
        )
        return bus.handle, output_port

    @staticmethod
    def test_gold_backend_is_always_right() -> None:
        run, output_port = TestRunTrials.create_service("mock:gold")
        run(commands.RunOrderTrials(trials=3, base_seed=0))
        assert output_port.response.stats.mean == 1.0
        assert output_port.response.stats.std == 0.0
        assert output_port.response.sweep == ()

    @staticmethod
    def test_selector_needs_parameters() -> None:
        run, _ = TestRunTrials.create_service("mock:gold")
        with pytest.raises(ValueError, match="trained parameters"):
            run(commands.RunOrderTrials(trials=1, base_seed=0, use_selector=True))

    @staticmethod
    def test_m_sweep() -> None:
        run, output_port = TestRunTrials.create_service("mock:gold", FakeParamsGateway(init_params(2, 8, 0)))
        run(commands.RunOrderTrials(trials=2, base_seed=0, use_selector=True, m=3, m_sweep=(1, 2)))
        assert [m for m, _ in output_port.response.sweep] == [1, 2]
        assert all(stats.mean == 1.0 for _, stats in output_port.response.sweep)


class TestComputeMetrics:
    @staticmethod
    def create_service(
        records: list[GraphRecord],
    ) -> tuple[Callable[[commands.ComputeMetrics], None], FakeOutputPort[events.MetricsComputed]]:
        bus, command_handlers = create_bus()
        output_port: FakeOutputPort[events.MetricsComputed] = FakeOutputPort()
        command_handlers[commands.ComputeMetrics] = partial(
            compute_metrics, dataset=FakeDatasetGateway(records), output_port=output_port
        )
        return bus.handle, output_port

    @staticmethod
    def test_homophily_and_same_class_proportion() -> None:
        compute, output_port = TestComputeMetrics.create_service([GraphRecord(create_triangle(("a", "a", "b")))])
        compute(commands.ComputeMetrics(homophily=True, same_class_target=0))
        assert output_port.response.rows == (("edge_homophily", pytest.approx(1 / 3)), ("same_class_proportion", 0.5))

    @staticmethod
    def test_nothing_requested() -> None:
        compute, output_port = TestComputeMetrics.create_service([GraphRecord(create_triangle())])
        compute(commands.ComputeMetrics())
        assert output_port.response.rows == ()


def test_build_scoring_data() -> None:
    bus, command_handlers = create_bus()
    output_port: FakeOutputPort[events.ScoringDataBuilt] = FakeOutputPort()
    command_handlers[commands.BuildScoringData] = partial(
        build_scoring_data, dataset=FakeDatasetGateway([GraphRecord(create_two_cliques())]), output_port=output_port
    )
    with pytest.warns(UserWarning, match="negative"):
        bus.handle(commands.BuildScoringData(count=2, seed=0))
    assert [example.label for example in output_port.response.examples] == [1, 1]


def test_generate_graph() -> None:
    bus, command_handlers = create_bus()
    output_port: FakeOutputPort[events.GraphGenerated] = FakeOutputPort()
    command_handlers[commands.GenerateGraph] = partial(generate_graph, output_port=output_port)
    bus.handle(commands.GenerateGraph(n=40, classes=2, target_h=0.75, seed=3))
    graph = output_port.response.graph
    assert len(graph) == 40
    assert edge_homophily(graph) == 0.75


def test_failing_command_propagates() -> None:
    bus, command_handlers = create_bus()
    command_handlers[commands.GenerateGraph] = partial(generate_graph, output_port=FakeOutputPort())
    with pytest.raises(ValueError, match="classes"):
        bus.handle(commands.GenerateGraph(n=1, classes=2, target_h=0.5, seed=0))


def test_trained_parameters_differ_from_initial() -> None:
    bus, command_handlers = create_bus()
    params = FakeParamsGateway()
    command_handlers[commands.TrainOsm] = partial(
        train_selector,
        dataset=FakeDatasetGateway(create_question_records(2)),
        params=params,
        llm=MockLlm(parse_mock_spec("mock:prefer-identity")),
        encoder=BuiltinEncoder(8),
        concurrency=1,
        message_bus=bus,
        output_port=FakeOutputPort(),
    )
    bus.handle(commands.TrainOsm(4, 0.5, 2, 0.05, 0.9, True, "sgd", 2, 0))
    assert not np.array_equal(params.saved[0].w_q, init_params(2, 8, 0).w_q)
