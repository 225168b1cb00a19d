"""Contains the backends reached over HTTP."""
from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from typing import Any, Union

import httpx

from graphsos.domain.errors import TransportError
from graphsos.domain.serialization import SerializedGraph
from graphsos.service.backends import ChatEndpoint, LlmBackend, Prompt, ScoringOracle

logger = logging.getLogger(__name__)


def post_json(client: httpx.Client, url: str, payload: Mapping[str, Any]) -> Any:
    """Post the payload and return the decoded response, turning every failure into a transport error."""
    logger.debug(f"Posting to {url}")
    try:
        response = client.post(url, json=dict(payload))
        response.raise_for_status()
        return response.json()
    except httpx.HTTPStatusError as error:
        raise TransportError(f"HTTP {error.response.status_code} from {url}: {error.response.text[:200]}") from error
    except httpx.HTTPError as error:
        raise TransportError(f"Request to {url} failed: {error!r}") from error
    except ValueError as error:
        raise TransportError(f"Response from {url} is not JSON: {error}") from error


def _field(body: Any, key: Union[str, int], url: str) -> Any:
    try:
        return body[key]
    except (KeyError, TypeError, IndexError):
        raise TransportError(f"Response from {url} lacks the field {key!r}.") from None


class HttpOracle(ScoringOracle):
    """A scoring oracle answering {text} with {logits: [l0, l1]}."""

    def __init__(self, client: httpx.Client, url: str) -> None:
        """Initialize the oracle."""
        self.client = client
        self.url = url

    def logits(self, serialized: SerializedGraph) -> tuple[float, float]:
        """Return the two logits the endpoint assigns to the rendered subgraph."""
        logits = _field(post_json(self.client, self.url, {"text": serialized.text}), "logits", self.url)
        if not isinstance(logits, list) or len(logits) != 2:  # noqa: PLR2004
            raise TransportError(f"Expected two logits from {self.url}, got {logits!r}.")
        return float(logits[0]), float(logits[1])

    def __repr__(self) -> str:
        """Return a string representation of the oracle."""
        return f"{self.__class__.__name__}({self.url!r})"


class HttpLlm(LlmBackend):
    """A frozen model served over HTTP.

    Likelihoods are posted as {prompt, target} to <base>/nll and answers as {prompt} to <base>/complete.
    """

    def __init__(self, client: httpx.Client, base_url: str) -> None:
        """Initialize the model."""
        self.client = client
        self.base_url = base_url.rstrip("/")

    def nll(self, prompt: Prompt, target: str) -> float:
        """Return the negative log-likelihood of the target reported by the endpoint."""
        url = f"{self.base_url}/nll"
        return float(_field(post_json(self.client, url, {"prompt": prompt.text, "target": target}), "nll", url))

    def complete(self, prompt: Prompt) -> str:
        """Return the completion reported by the endpoint."""
        url = f"{self.base_url}/complete"
        return str(_field(post_json(self.client, url, {"prompt": prompt.text}), "completion", url))

    def __repr__(self) -> str:
        """Return a string representation of the model."""
        return f"{self.__class__.__name__}({self.base_url!r})"


class HttpChat(ChatEndpoint):
    """A chat-completion endpoint speaking the common choices/message response shape."""

    def __init__(self, client: httpx.Client, url: str) -> None:
        """Initialize the endpoint."""
        self.client = client
        self.url = url

    def chat(self, messages: Sequence[Mapping[str, str]], temperature: float, max_tokens: int) -> str:
        """Return the content of the first choice."""
        body = post_json(
            self.client,
            self.url,
            {"messages": [dict(message) for message in messages], "temperature": temperature, "max_tokens": max_tokens},
        )
        choice = _field(_field(body, "choices", self.url), 0, self.url)
        return str(_field(_field(choice, "message", self.url), "content", self.url))

    def __repr__(self) -> str:
        """Return a string representation of the endpoint."""
        return f"{self.__class__.__name__}({self.url!r})"
