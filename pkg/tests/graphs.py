from __future__ import annotations

from collections.abc import Sequence
from typing import Optional

from graphsos.domain.graph import GraphRecord, NodeRecord, TextGraph, create_graph

WORDS = ("alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel")


def create_nodes(
    count: int, *, texts: Optional[Sequence[str]] = None, labels: Optional[Sequence[str]] = None
) -> list[NodeRecord]:
    return [
        NodeRecord(node, None if texts is None else texts[node], None if labels is None else labels[node])
        for node in range(count)
    ]


def create_path(count: int, *, texts: bool = True, labels: Optional[Sequence[str]] = None) -> TextGraph:
    return create_graph(
        create_nodes(count, texts=WORDS[:count] if texts else None, labels=labels),
        [(node, node + 1) for node in range(count - 1)],
    )


def create_star(leaves: int, *, texts: Optional[Sequence[str]] = None) -> TextGraph:
    return create_graph(create_nodes(leaves + 1, texts=texts), [(0, leaf) for leaf in range(1, leaves + 1)])


def create_triangle(labels: Sequence[str] = ("a", "a", "a")) -> TextGraph:
    return create_graph(create_nodes(3, texts=WORDS[:3], labels=labels), [(0, 1), (1, 2), (0, 2)])


def create_two_node_graph() -> TextGraph:
    return create_graph([NodeRecord(0, "A"), NodeRecord(1, "B")], [(0, 1)])


def create_knowledge_graph() -> TextGraph:
    triples = [("Paris", "capital of", "France"), ("France", "member of", "EU"), ("Berlin", "capital of", "Germany")]
    entities: dict[str, int] = {}
    for subject, _, obj in triples:
        entities.setdefault(subject, len(entities))
        entities.setdefault(obj, len(entities))
    return create_graph(
        [NodeRecord(node, entity) for entity, node in entities.items()],
        [(entities[subject], entities[obj]) for subject, _, obj in triples],
        triples=triples,
        directed=True,
    )


def create_question_records(
    count: int, *, size: int = 6, question: str = "Which word comes first?", answer: str = "alpha"
) -> list[GraphRecord]:
    return [GraphRecord(create_path(size), question, answer, target=0) for _ in range(count)]


def create_two_cliques(size: int = 4) -> TextGraph:
    labels = ["a"] * size + ["b"] * size
    edges: list[tuple[int, int]] = []
    for offset in (0, size):
        edges.extend((offset + i, offset + j) for i in range(size) for j in range(i + 1, size))
    return create_graph(create_nodes(2 * size, texts=[f"word{node}" for node in range(2 * size)], labels=labels), edges)

