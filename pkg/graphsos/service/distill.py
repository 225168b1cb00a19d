"""Contains the distillation of Graph-CoT answers from a chat endpoint."""
from __future__ import annotations

import logging
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from graphsos.domain.errors import TransportError
from graphsos.domain.graph import GraphRecord
from graphsos.domain.serialization import Ordering, SerializationKind, default_kind, serialize
from graphsos.domain.tuning import CotRecord, build_cot_prompt, build_prompt, validate_cot

from .backends import ChatEndpoint, with_retries
from .ssm import StepCallback

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.9
DEFAULT_MAX_TOKENS = 512
FORMAT_ATTEMPTS = 2


@dataclass(frozen=True)
class DistillResult:
    """The distilled records and the number of prompts that produced none."""

    records: tuple[CotRecord, ...]
    dropped: int


def _request(endpoint: ChatEndpoint, prompt: str, temperature: float, max_tokens: int) -> Optional[str]:
    messages = [{"role": "user", "content": prompt}]
    for attempt in range(1, FORMAT_ATTEMPTS + 1):
        reply = with_retries(lambda: endpoint.chat(messages, temperature, max_tokens))
        if validate_cot(reply):
            return reply
        logger.debug(f"Reply {attempt} of {FORMAT_ATTEMPTS} lacks the section markers")
    return None


def distill(  # noqa: PLR0913
    records: Sequence[GraphRecord],
    endpoint: ChatEndpoint,
    *,
    temperature: float = DEFAULT_TEMPERATURE,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    kind: Optional[SerializationKind] = None,
    concurrency: int = 4,
    on_step: Optional[StepCallback] = None,
) -> DistillResult:
    """Ask the endpoint for a Graph-CoT answer to every record's question.

    Replies without the analysis, reasoning and answer markers are requested once more and then dropped. Records
    whose endpoint keeps failing are dropped as well.
    """
    if max_tokens < 1:
        raise ValueError(f"Need a positive token cap, got {max_tokens}.")
    for record in records:
        if record.question is None or record.answer is None:
            raise ValueError("Distillation needs records with a question and an answer.")

    def work(indexed: tuple[int, GraphRecord]) -> Optional[CotRecord]:
        index, record = indexed
        assert record.question is not None
        graph_kind = kind or default_kind(record.graph)
        cot_prompt = build_cot_prompt(record.graph, record.question, graph_kind)
        try:
            reply = _request(endpoint, cot_prompt, temperature, max_tokens)
        except TransportError as error:
            logger.warning(f"Dropping record {index} after endpoint failure: {error}")
            reply = None
        if reply is None:
            return None
        plain = build_prompt(serialize(record.graph, Ordering.identity(record.graph), graph_kind), record.question)
        return CotRecord(plain, record.answer, reply)

    logger.info(f"Distilling {len(records)} records at temperature {temperature} with {max_tokens} max tokens")
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        results: list[Optional[CotRecord]] = []
        for index, result in enumerate(pool.map(work, enumerate(records))):
            results.append(result)
            if on_step is not None:
                on_step(index, None)
    distilled = tuple(result for result in results if result is not None)
    dropped = len(results) - len(distilled)
    if dropped:
        warnings.warn(
            f"Dropped {dropped} records without a well-formed CoT answer.", category=UserWarning, stacklevel=2
        )
    return DistillResult(distilled, dropped)
