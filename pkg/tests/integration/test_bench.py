from __future__ import annotations

import math
from itertools import permutations

import numpy as np
import pytest

from graphsos.adapters.mock import MockLlm, parse_mock_spec
from graphsos.domain.attention import AttentionParams, init_params
from graphsos.domain.encoder import BuiltinEncoder, TableEncoder
from graphsos.domain.errors import TransportError
from graphsos.domain.graph import GraphRecord
from graphsos.domain.serialization import Ordering, SerializationKind, serialize
from graphsos.service.backends import LlmBackend, Prompt
from graphsos.service.bench import run_order_trials, sweep_m
from graphsos.service.osm import OrderSelector
from tests.graphs import create_path, create_question_records


class FailingLlm(LlmBackend):
    def nll(self, prompt: Prompt, target: str) -> float:
        raise TransportError("backend unavailable")

    def complete(self, prompt: Prompt) -> str:
        raise TransportError("backend unavailable")


def create_backend(spec: str) -> MockLlm:
    return MockLlm(parse_mock_spec(spec))


def test_gold_backend_is_always_right() -> None:
    results, stats = run_order_trials(create_question_records(4), create_backend("mock:gold"), trials=5)
    assert [result.accuracy for result in results] == [1.0] * 5
    assert (stats.mean, stats.std) == (1.0, 0.0)


def test_identity_only_backend_fails_under_shuffled_orders() -> None:
    _, stats = run_order_trials(create_question_records(8), create_backend("mock:identity-only"), trials=5)
    assert stats.mean < 0.2


def test_identity_only_accuracy_matches_identity_hit_probability() -> None:
    records, trials = create_question_records(30, size=3), 10
    _, stats = run_order_trials(records, create_backend("mock:identity-only"), trials=trials, base_seed=5)
    hit = 1 / math.factorial(3)
    sigma = math.sqrt(hit * (1 - hit) / (len(records) * trials))
    assert abs(stats.mean - hit) <= 2 * sigma


def test_pinned_identity_trial_is_answered() -> None:
    results, _ = run_order_trials(
        create_question_records(4), create_backend("mock:identity-only"), trials=3, pin_identity_first=True
    )
    assert results[0].accuracy == 1.0


def test_trials_are_seeded() -> None:
    records = create_question_records(4)
    backend = create_backend("mock:prefer-identity,threshold=0.3")
    first, _ = run_order_trials(records, backend, trials=4, base_seed=11)
    second, _ = run_order_trials(records, backend, trials=4, base_seed=11)
    assert first == second
    assert [result.seed for result in first] == [11, 12, 13, 14]


def test_backend_failures_count_as_incorrect() -> None:
    results, stats = run_order_trials(create_question_records(1), FailingLlm(), trials=1)
    assert results[0].errors == 1
    assert results[0].correct == (False,)
    assert stats.mean == 0.0


@pytest.mark.parametrize(
    "record", [GraphRecord(create_path(3), "Which word?", None), GraphRecord(create_path(3), None, "alpha")]
)
def test_needs_question_and_answer(record: GraphRecord) -> None:
    with pytest.raises(ValueError, match="gold answer"):
        run_order_trials([record], create_backend("mock:gold"))


def test_needs_a_trial() -> None:
    with pytest.raises(ValueError, match="trial"):
        run_order_trials(create_question_records(1), create_backend("mock:gold"), trials=0)


def test_selector_routes_the_orderings() -> None:
    selector = OrderSelector(init_params(2, 8, 0), BuiltinEncoder(8), 1, 0.5)
    results, stats = run_order_trials(
        create_question_records(3), create_backend("mock:identity-only"), trials=3, selector=selector
    )
    assert stats.mean == 1.0
    assert len(results) == 3


def test_sweep_m() -> None:
    selector = OrderSelector(init_params(2, 8, 0), BuiltinEncoder(8), 4, 0.5)
    sweep = sweep_m(create_question_records(3), create_backend("mock:identity-only"), selector, [1, 3], trials=2)
    assert [m for m, _ in sweep] == [1, 3]
    assert sweep[0][1].mean == 1.0


def create_identity_preferring_selector(m: int) -> OrderSelector:
    graph = create_path(3)
    question = create_question_records(1)[0].question
    assert question is not None
    vectors = {question: np.array([1.0, 0.0])}
    for feature_perm in permutations(range(3)):
        for edge_perm in permutations(range(2)):
            rendering = serialize(graph, Ordering(feature_perm, edge_perm), SerializationKind.FEATURE_EDGE)
            vectors[rendering.text] = np.eye(2)[0 if feature_perm == (0, 1, 2) else 1]
    params = AttentionParams(10.0 * np.eye(2)[None], 10.0 * np.eye(2)[None])
    return OrderSelector(params, TableEncoder(vectors), m, 0.5)


def test_selector_routing_steadies_accuracy() -> None:
    records = create_question_records(4, size=3)
    backend = create_backend("mock:prefer-identity")
    _, shuffled = run_order_trials(records, backend, trials=10, base_seed=3)
    _, routed = run_order_trials(
        records, backend, trials=10, base_seed=3, selector=create_identity_preferring_selector(4)
    )
    assert (routed.mean, routed.std) == (1.0, 0.0)
    assert shuffled.std > routed.std
