from __future__ import annotations

import pytest

from graphsos.adapters.mock import VALID_COT, create_mock_chat
from graphsos.domain.graph import GraphRecord
from graphsos.domain.tuning import validate_cot
from graphsos.service.distill import distill
from tests.graphs import create_path, create_question_records


def test_well_formed_replies_are_kept() -> None:
    chat = create_mock_chat("mock:valid")
    result = distill(create_question_records(3), chat, concurrency=2)
    assert result.dropped == 0
    assert len(result.records) == 3
    for record in result.records:
        assert record.sft_answer == "alpha"
        assert record.cot_answer == VALID_COT
        assert record.prompt.startswith("Feature List: [Node 0: alpha")
        assert validate_cot(record.cot_answer)
    assert len(chat.requests) == 3
    assert all(request["temperature"] == 0.9 and request["max_tokens"] == 512 for request in chat.requests)


def test_sampling_settings_reach_the_endpoint() -> None:
    chat = create_mock_chat("mock:valid")
    distill(create_question_records(1), chat, temperature=0.2, max_tokens=64)
    (request,) = chat.requests
    assert (request["temperature"], request["max_tokens"]) == (0.2, 64)
    assert request["messages"][0]["role"] == "user"  # type: ignore[index]


def test_malformed_replies_are_requested_again_and_dropped() -> None:
    chat = create_mock_chat("mock:no-reasoning")
    with pytest.warns(UserWarning, match="Dropped 2 records"):
        result = distill(create_question_records(2), chat)
    assert result.records == ()
    assert result.dropped == 2
    assert len(chat.requests) == 4


def test_needs_question_and_answer() -> None:
    with pytest.raises(ValueError, match="question and an answer"):
        distill([GraphRecord(create_path(3), "Which word?")], create_mock_chat("mock:valid"))


def test_needs_a_token_cap() -> None:
    with pytest.raises(ValueError, match="token cap"):
        distill(create_question_records(1), create_mock_chat("mock:valid"), max_tokens=0)
