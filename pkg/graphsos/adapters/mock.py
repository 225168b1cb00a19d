"""Contains simulated language model and chat backends keyed on the expected answer."""
from __future__ import annotations

import threading
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum

from graphsos.domain.errors import BackendSpecError
from graphsos.domain.serialization import kendall_distance, node_sequence
from graphsos.service.backends import ChatEndpoint, LlmBackend, Prompt

MOCK_PREFIX = "mock:"
QUESTION_SEPARATOR = "\nQuestion: "


class MockMode(Enum):
    """How a simulated model reacts to the ordering of a rendering."""

    GOLD = "gold"
    IDENTITY_ONLY = "identity-only"
    PREFER_IDENTITY = "prefer-identity"


@dataclass(frozen=True)
class MockSpec:
    """The behavior of a simulated model."""

    mode: MockMode
    alpha: float
    beta: float = 0.1
    threshold: float = 0.2


def parse_mock_spec(spec: str) -> MockSpec:
    """Parse a spec of the form 'mock:<mode>[,alpha=<f>][,beta=<f>][,threshold=<f>]'."""
    if not spec.startswith(MOCK_PREFIX):
        raise BackendSpecError(f"Mock specs start with {MOCK_PREFIX!r}, got {spec!r}.")
    mode_name, *options = spec[len(MOCK_PREFIX) :].split(",")
    try:
        mode = MockMode(mode_name)
    except ValueError:
        modes = ", ".join(mode.value for mode in MockMode)
        raise BackendSpecError(f"Unknown mock mode {mode_name!r}, expected one of {modes}.") from None
    values = {"alpha": 0.0 if mode is MockMode.GOLD else 1.0}
    for option in options:
        key, separator, value = option.partition("=")
        if not separator or key not in ("alpha", "beta", "threshold"):
            raise BackendSpecError(f"Unknown mock option {option!r}.")
        try:
            values[key] = float(value)
        except ValueError:
            raise BackendSpecError(f"Mock option {key} needs a number, got {value!r}.") from None
    return MockSpec(mode, **values)


def rendering_distance(prompt_text: str) -> float:
    """Return the Kendall distance of the rendering's node order from ascending ids."""
    rendering = prompt_text.split(QUESTION_SEPARATOR, 1)[0]
    return kendall_distance(node_sequence(rendering))


def prompt_distance(prompt: Prompt) -> float:
    """Return the Kendall distance of the served ordering from the identity.

    Prompts that do not carry their rendering fall back to reading the node order from the text.
    """
    if prompt.rendering is None:
        return rendering_distance(prompt.text)
    return kendall_distance(prompt.rendering.ordering.permutation(prompt.rendering.kind))


class MockLlm(LlmBackend):
    """A frozen model whose answers and likelihoods depend only on how far a rendering is from the identity order."""

    def __init__(self, spec: MockSpec) -> None:
        """Initialize the model."""
        self.spec = spec

    def nll(self, prompt: Prompt, target: str) -> float:
        """Return alpha times the rendering's distance from the identity order plus beta."""
        if self.spec.alpha == 0.0:
            return self.spec.beta
        return self.spec.alpha * prompt_distance(prompt) + self.spec.beta

    def complete(self, prompt: Prompt) -> str:
        """Return the expected answer if the rendering's order is acceptable to the mode, else an empty answer."""
        if prompt.expected is None:
            return ""
        if self.spec.mode is MockMode.GOLD:
            return prompt.expected
        distance = prompt_distance(prompt)
        limit = 0.0 if self.spec.mode is MockMode.IDENTITY_ONLY else self.spec.threshold
        return prompt.expected if distance <= limit else ""

    def __repr__(self) -> str:
        """Return a string representation of the model."""
        return f"{self.__class__.__name__}({self.spec.mode.value}, alpha={self.spec.alpha}, beta={self.spec.beta})"


VALID_COT = (
    "Analysis: The target node's text and the texts of its neighbors share most of their words.\n"
    "Reasoning: Neighbors mostly belong to one class, so the target most likely belongs to it as well.\n"
    "Answer: "
)
NO_REASONING_COT = "Analysis: The target node's text was inspected.\nAnswer: "


class MockChat(ChatEndpoint):
    """A chat endpoint returning a canned Graph-CoT reply and recording every request."""

    def __init__(self, reply: str) -> None:
        """Initialize the endpoint."""
        self.reply = reply
        self.requests: list[dict[str, object]] = []
        self._lock = threading.Lock()

    def chat(self, messages: Sequence[Mapping[str, str]], temperature: float, max_tokens: int) -> str:
        """Record the request and return the canned reply."""
        with self._lock:
            self.requests.append(
                {
                    "messages": [dict(message) for message in messages],
                    "temperature": temperature,
                    "max_tokens": max_tokens,
                }
            )
        return self.reply


_CHAT_REPLIES = {"valid": VALID_COT, "no-reasoning": NO_REASONING_COT}


def create_mock_chat(spec: str) -> MockChat:
    """Create a chat endpoint from a spec of the form 'mock:valid' or 'mock:no-reasoning'."""
    reply = _CHAT_REPLIES.get(spec[len(MOCK_PREFIX) :]) if spec.startswith(MOCK_PREFIX) else None
    if reply is None:
        raise BackendSpecError(f"Unknown chat mock {spec!r}, expected mock:valid or mock:no-reasoning.")
    return MockChat(reply)
