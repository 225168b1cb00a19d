"""Contains the construction of backends from their specs."""
from __future__ import annotations

import logging
from collections.abc import Callable
from typing import Optional

import httpx

from graphsos.adapters.http import HttpChat, HttpLlm, HttpOracle
from graphsos.adapters.mock import MOCK_PREFIX, MockLlm, create_mock_chat, parse_mock_spec
from graphsos.adapters.oracles import HomophilyOracle
from graphsos.domain.errors import BackendSpecError
from graphsos.service.backends import ChatEndpoint, LlmBackend, ScoringOracle

logger = logging.getLogger(__name__)

HTTP_PREFIX = "http:"
BUILTIN = "builtin"


def create_http_client(token: Callable[[], Optional[str]], timeout: float = 60.0) -> httpx.Client:
    """Create a client sending the bearer token if one is provided."""
    headers = {"Content-Type": "application/json"}
    bearer = token()
    if bearer:
        headers["Authorization"] = f"Bearer {bearer}"
    return httpx.Client(headers=headers, timeout=timeout)


def http_url(spec: str) -> Optional[str]:
    """Return the URL of an 'http:<url>' spec or of a plain URL, None for other specs."""
    if spec.startswith(("http://", "https://")):
        return spec
    if spec.startswith(HTTP_PREFIX):
        url = spec[len(HTTP_PREFIX) :]
        if not url:
            raise BackendSpecError(f"Missing URL in backend spec {spec!r}.")
        return url
    return None


def create_llm_backend(spec: str, client: Callable[[], httpx.Client]) -> LlmBackend:
    """Create a frozen language model from a 'mock:<mode>' or 'http:<url>' spec."""
    if spec.startswith(MOCK_PREFIX):
        backend: LlmBackend = MockLlm(parse_mock_spec(spec))
    else:
        url = http_url(spec)
        if url is None:
            raise BackendSpecError(f"Unknown backend spec {spec!r}, expected mock:<mode> or http:<url>.")
        backend = HttpLlm(client(), url)
    logger.info(f"Using language model {backend!r}")
    return backend


def create_oracle(spec: str, client: Callable[[], httpx.Client]) -> ScoringOracle:
    """Create a scoring oracle from a 'builtin' or 'http:<url>' spec."""
    if spec == BUILTIN:
        return HomophilyOracle()
    url = http_url(spec)
    if url is None:
        raise BackendSpecError(f"Unknown oracle spec {spec!r}, expected builtin or http:<url>.")
    return HttpOracle(client(), url)


def create_chat_endpoint(spec: str, client: Callable[[], httpx.Client]) -> ChatEndpoint:
    """Create a chat endpoint from a 'mock:valid', 'mock:no-reasoning' or 'http:<url>' spec."""
    if spec.startswith(MOCK_PREFIX):
        return create_mock_chat(spec)
    url = http_url(spec)
    if url is None:
        raise BackendSpecError(f"Unknown endpoint spec {spec!r}, expected mock:<canned> or http:<url>.")
    return HttpChat(client(), url)
