"""Contains the interfaces of the scoring, language model and chat backends."""
from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Callable, Optional, TypeVar

from graphsos.domain.errors import TransportError
from graphsos.domain.graph import TextGraph
from graphsos.domain.serialization import SerializedGraph

logger = logging.getLogger(__name__)

R = TypeVar("R")

MAX_ATTEMPTS = 3


@dataclass(frozen=True)
class Prompt:
    """A prompt sent to a language model.

    The expected answer and the served rendering are only consulted by simulated backends and never leave the process.
    """

    text: str
    expected: Optional[str] = None
    rendering: Optional[SerializedGraph] = None


class ScoringOracle(ABC):
    """Scores subgraphs with two first-token logits."""

    @abstractmethod
    def logits(self, serialized: SerializedGraph) -> tuple[float, float]:
        """Return the logits of the labels 0 and 1 for the rendered subgraph."""

    def for_graph(self, graph: TextGraph) -> ScoringOracle:
        """Return an oracle scoring subgraphs of the given graph."""
        return self


class LlmBackend(ABC):
    """A frozen language model."""

    @abstractmethod
    def nll(self, prompt: Prompt, target: str) -> float:
        """Return the negative log-likelihood of the target given the prompt."""

    @abstractmethod
    def complete(self, prompt: Prompt) -> str:
        """Return the model's answer to the prompt."""


class ChatEndpoint(ABC):
    """A chat-completion endpoint used for distillation."""

    @abstractmethod
    def chat(self, messages: Sequence[Mapping[str, str]], temperature: float, max_tokens: int) -> str:
        """Return the assistant's reply to the messages."""


def with_retries(
    call: Callable[[], R],
    *,
    attempts: int = MAX_ATTEMPTS,
    backoff: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> R:
    """Call until it succeeds, waiting exponentially longer after every transport error."""
    for attempt in range(1, attempts + 1):
        try:
            return call()
        except TransportError as error:
            if attempt == attempts:
                raise TransportError(error.reason, attempts) from error
            wait = backoff * 2 ** (attempt - 1)
            logger.warning(f"Attempt {attempt} of {attempts} failed ({error}), retrying in {wait}s")
            sleep(wait)
    raise AssertionError("unreachable")
