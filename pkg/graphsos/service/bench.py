"""Contains the order-sensitivity harness."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from graphsos.domain.errors import TransportError
from graphsos.domain.grading import TrialResult, TrialStats, grade_answer, summarize
from graphsos.domain.graph import GraphRecord
from graphsos.domain.serialization import (
    Ordering,
    SerializationKind,
    SerializedGraph,
    default_kind,
    random_ordering,
    serialize,
)
from graphsos.domain.tuning import build_prompt

from .backends import LlmBackend, Prompt, with_retries
from .osm import OrderSelector
from .ssm import StepCallback

logger = logging.getLogger(__name__)


def _render(
    record: GraphRecord,
    kind: SerializationKind,
    rng: np.random.Generator,
    *,
    identity: bool,
    selector: Optional[OrderSelector],
) -> SerializedGraph:
    assert record.question is not None
    if identity:
        return serialize(record.graph, Ordering.identity(record.graph), kind)
    if selector is not None:
        return selector.choose(record.graph, record.question, kind, rng)
    return serialize(record.graph, random_ordering(record.graph, rng), kind)


def _ask(backend: LlmBackend, prompt: Prompt) -> Optional[str]:
    try:
        return with_retries(lambda: backend.complete(prompt))
    except TransportError as error:
        logger.warning(f"Counting an answer as incorrect after backend failure: {error}")
        return None


def run_order_trials(  # noqa: PLR0913
    dataset: Sequence[GraphRecord],
    backend: LlmBackend,
    trials: int = 10,
    base_seed: int = 0,
    kind: Optional[SerializationKind] = None,
    *,
    labels: Sequence[str] = (),
    pin_identity_first: bool = False,
    selector: Optional[OrderSelector] = None,
    concurrency: int = 4,
    on_step: Optional[StepCallback] = None,
) -> tuple[list[TrialResult], TrialStats]:
    """Ask every question once per trial under a fresh ordering of its graph and grade the answers.

    Trial t draws its orderings from a generator seeded with base_seed + t, either uniformly or through the given
    selector. Failed backend calls count as incorrect and are tallied separately.
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}.")
    for record in dataset:
        if record.question is None or record.answer is None:
            raise ValueError("Order trials need records with a question and a gold answer.")
    results: list[TrialResult] = []
    logger.info(f"Running {trials} order trials on {len(dataset)} examples")
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        for trial in range(trials):
            seed = base_seed + trial
            rng = np.random.default_rng(seed)
            prompts = []
            for record in dataset:
                assert record.question is not None
                rendered = _render(
                    record,
                    kind or default_kind(record.graph),
                    rng,
                    identity=pin_identity_first and trial == 0,
                    selector=selector,
                )
                prompts.append(Prompt(build_prompt(rendered, record.question), record.answer, rendered))
            responses = list(pool.map(lambda prompt: _ask(backend, prompt), prompts))
            correct = tuple(
                response is not None and grade_answer(response, prompt.expected or "", labels or None)
                for response, prompt in zip(responses, prompts)
            )
            result = TrialResult(trial, correct, sum(response is None for response in responses), seed)
            logger.debug(f"Trial {trial}: accuracy {result.accuracy:.4f}, {result.errors} errors")
            results.append(result)
            if on_step is not None:
                on_step(trial, None)
    return results, summarize(results)


def sweep_m(  # noqa: PLR0913
    dataset: Sequence[GraphRecord],
    backend: LlmBackend,
    selector: OrderSelector,
    values: Sequence[int],
    trials: int = 10,
    base_seed: int = 0,
    kind: Optional[SerializationKind] = None,
    *,
    labels: Sequence[str] = (),
    concurrency: int = 4,
) -> list[tuple[int, TrialStats]]:
    """Repeat the trials routed through the selector for every number of order candidates."""
    sweep = []
    for m in values:
        routed = OrderSelector(selector.params, selector.encoder, m, selector.tau)
        _, stats = run_order_trials(
            dataset, backend, trials, base_seed, kind, labels=labels, selector=routed, concurrency=concurrency
        )
        logger.info(f"m={m}: mean accuracy {stats.mean:.4f}, std {stats.std:.4f}")
        sweep.append((m, stats))
    return sweep
