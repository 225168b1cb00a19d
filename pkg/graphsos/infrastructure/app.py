"""Contains the function wiring the use-cases of a run together."""
from __future__ import annotations

import logging
from collections.abc import Callable
from functools import partial
from pathlib import Path
from typing import Optional

import httpx

from graphsos.adapters.checkpoint import FileParamsGateway, read_params
from graphsos.adapters.controller import CliController
from graphsos.adapters.present import (
    Emit,
    create_cot_writer,
    create_graph_presenter,
    create_metrics_presenter,
    create_scoring_data_presenter,
    create_selection_presenter,
    create_serialized_presenter,
    create_trace_presenter,
    create_training_presenter,
    create_trials_writer,
)
from graphsos.adapters.progress import ProgressDisplayAdapter, ProgressView
from graphsos.adapters.records import JsonlDatasetGateway
from graphsos.adapters.tables import load_embedding_table
from graphsos.domain import commands, events
from graphsos.domain.encoder import BuiltinEncoder, EncoderHandle
from graphsos.service.handlers import (
    build_cot_data,
    build_scoring_data,
    compute_metrics,
    generate_graph,
    inform_batch_processing_finished,
    inform_batch_processing_started,
    inform_step_finished,
    run_trials,
    sample_subgraphs,
    select_orders,
    serialize_graphs,
    train_sampler,
    train_selector,
)
from graphsos.service.messagebus import CommandHandlers, EventHandlers, MessageBus

from .backends import create_chat_endpoint, create_llm_backend, create_oracle
from .config import RunConfig

logger = logging.getLogger(__name__)


def create_encoder(config: RunConfig) -> EncoderHandle:
    """Create the encoder from the embedding table or the builtin encoder sized to match the checkpoint."""
    if config.embeddings is not None:
        return load_embedding_table(config.embeddings)
    dim = config.d
    if config.params is not None:
        dim = read_params(config.params).d
        if dim != config.d:
            logger.info(f"Using embedding dimension {dim} of checkpoint {config.params}")
    return BuiltinEncoder(dim, config.encoder_seed, config.positional_buckets)


def create_controller(
    config: RunConfig,
    *,
    emit: Emit,
    progress_view: ProgressView,
    client: Callable[[], httpx.Client],
    encoder: Optional[EncoderHandle] = None,
) -> CliController:
    """Create a controller whose use-cases are backed by the configured files and backends."""
    if encoder is None:
        encoder = create_encoder(config)
    command_handlers: CommandHandlers = {}
    event_handlers: EventHandlers = {}
    bus = MessageBus(command_handlers, event_handlers)

    command_handlers[commands.GenerateGraph] = partial(generate_graph, output_port=create_graph_presenter(emit))
    if config.input is not None:
        dataset = JsonlDatasetGateway(config.input)
        params = None if config.params is None else FileParamsGateway(config.params)
        command_handlers[commands.SerializeGraphs] = partial(
            serialize_graphs, dataset=dataset, output_port=create_serialized_presenter(emit)
        )
        command_handlers[commands.SampleSubgraph] = partial(
            sample_subgraphs, dataset=dataset, params=params, encoder=encoder, output_port=create_trace_presenter(emit)
        )
        command_handlers[commands.ComputeMetrics] = partial(
            compute_metrics, dataset=dataset, output_port=create_metrics_presenter(emit)
        )
        command_handlers[commands.BuildScoringData] = partial(
            build_scoring_data, dataset=dataset, output_port=create_scoring_data_presenter(emit)
        )
        if params is not None:
            command_handlers[commands.SelectOrder] = partial(
                select_orders,
                dataset=dataset,
                params=params,
                encoder=encoder,
                output_port=create_selection_presenter(emit),
            )
        if config.output is not None:
            checkpoint = FileParamsGateway(config.output)
            command_handlers[commands.TrainSsm] = partial(
                train_sampler,
                dataset=dataset,
                params=checkpoint,
                oracle=create_oracle(config.oracle, client),
                encoder=encoder,
                message_bus=bus,
                output_port=create_training_presenter(emit),
            )
        if config.backend is not None:
            llm = create_llm_backend(config.backend, client)
            if config.output is not None:
                command_handlers[commands.TrainOsm] = partial(
                    train_selector,
                    dataset=dataset,
                    params=FileParamsGateway(config.output),
                    llm=llm,
                    encoder=encoder,
                    concurrency=config.concurrency,
                    message_bus=bus,
                    output_port=create_training_presenter(emit),
                )
            command_handlers[commands.RunOrderTrials] = partial(
                run_trials,
                dataset=dataset,
                llm=llm,
                encoder=encoder,
                params=params,
                concurrency=config.concurrency,
                message_bus=bus,
                output_port=create_trials_writer(None if config.output is None else Path(config.output), emit),
            )
        if config.endpoint is not None and config.sft_output is not None and config.dpo_output is not None:
            command_handlers[commands.BuildCotData] = partial(
                build_cot_data,
                dataset=dataset,
                endpoint=create_chat_endpoint(config.endpoint, client),
                concurrency=config.concurrency,
                message_bus=bus,
                output_port=create_cot_writer(Path(config.sft_output), Path(config.dpo_output), emit),
            )

    display = ProgressDisplayAdapter(progress_view)
    event_handlers[events.BatchProcessingStarted] = [partial(inform_batch_processing_started, display=display)]
    event_handlers[events.StepFinished] = [partial(inform_step_finished, display=display)]
    event_handlers[events.BatchProcessingFinished] = [partial(inform_batch_processing_finished, display=display)]

    return CliController(bus)
