"""Contains the textual renderings of graphs, their orderings and the parser reading them back."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.stats import kendalltau

from .custom_types import NodeId
from .errors import (
    GraphConstructionError,
    GraphSemanticError,
    ParseError,
    SerializationFormatError,
)
from .graph import NodeRecord, TextGraph, create_graph

IDENTITY = "identity"

FEATURE_HEADER = "Feature List: ["
EDGE_HEADER = "Edge List: ["
TRIPLE_HEADER = "Triple List: ["
NODE_SEPARATOR = " | "


class SerializationKind(Enum):
    """The textual formats a graph can be rendered in."""

    FEATURE_EDGE = "feature-edge"
    EDGE = "edge"
    TRIPLE = "triple"


@dataclass(frozen=True)
class Ordering:
    """The order in which the elements of a graph are rendered."""

    feature_perm: tuple[int, ...]
    edge_perm: tuple[int, ...]
    triple_perm: tuple[int, ...] = ()
    seed: Optional[Union[int, str]] = None

    def __post_init__(self) -> None:
        """Check that every permutation is a bijection on its index range."""
        for name in ("feature_perm", "edge_perm", "triple_perm"):
            perm = getattr(self, name)
            if sorted(perm) != list(range(len(perm))):
                raise ValueError(f"{name} is not a permutation: {perm!r}")

    @classmethod
    def identity(cls, graph: TextGraph) -> Ordering:
        """Return the ordering that renders every element in its stored position."""
        return cls(
            tuple(range(len(graph.nodes))),
            tuple(range(len(graph.edges))),
            tuple(range(len(graph.triples))),
            seed=IDENTITY,
        )

    @property
    def is_identity(self) -> bool:
        """Return True if no element is moved."""
        return all(perm == tuple(range(len(perm))) for perm in (self.feature_perm, self.edge_perm, self.triple_perm))

    def permutation(self, kind: SerializationKind) -> tuple[int, ...]:
        """Return the permutation of the elements that lead a rendering of the given kind."""
        if kind is SerializationKind.TRIPLE:
            return self.triple_perm
        if kind is SerializationKind.EDGE:
            return self.edge_perm
        return self.feature_perm


@dataclass(frozen=True)
class SerializedGraph:
    """A rendered graph together with the ordering and kind that produced it."""

    text: str
    ordering: Ordering
    kind: SerializationKind


_NODE_ESCAPES = {"\\": "\\\\", "|": "\\p", "[": "\\[", "]": "\\]", "(": "\\(", ")": "\\)", "\n": "\\n"}
_TRIPLE_ESCAPES = {**_NODE_ESCAPES, ",": "\\,"}


def _inverse(escapes: dict[str, str]) -> dict[str, str]:
    return {escaped[1]: raw for raw, escaped in escapes.items()}


def escape(text: str, *, triple: bool = False) -> str:
    """Escape the characters that carry meaning in the rendering grammar."""
    table = _TRIPLE_ESCAPES if triple else _NODE_ESCAPES
    return "".join(table.get(char, char) for char in text)


def unescape(text: str, *, triple: bool = False) -> str:
    """Undo escape."""
    return _Parser(text).read_text(frozenset(), triple=triple, until_end=True)


def serialize(graph: TextGraph, ordering: Ordering, kind: SerializationKind) -> SerializedGraph:
    """Render the graph in the given kind, placing its elements in the ordering's order."""
    if kind is SerializationKind.FEATURE_EDGE and not graph.has_text:
        raise SerializationFormatError("The feature-edge rendering needs node text on every node.")
    if kind is SerializationKind.TRIPLE and not graph.triples:
        raise SerializationFormatError("The triple rendering needs a graph with triples.")
    expected = (len(graph.nodes), len(graph.edges), len(graph.triples))
    actual = (len(ordering.feature_perm), len(ordering.edge_perm), len(ordering.triple_perm))
    if expected != actual:
        raise SerializationFormatError(f"Ordering sized {actual} does not fit graph sized {expected}.")
    if kind is SerializationKind.TRIPLE:
        triples = [graph.triples[i] for i in ordering.triple_perm]
        body = " ".join(
            "(" + ", ".join(escape(part, triple=True) for part in triple) + ")" for triple in triples
        )
        return SerializedGraph(f"{TRIPLE_HEADER}{body}]", ordering, kind)
    edge_list = EDGE_HEADER + " ".join(f"({graph.edges[i][0]}, {graph.edges[i][1]})" for i in ordering.edge_perm) + "]"
    if kind is SerializationKind.EDGE:
        return SerializedGraph(edge_list, ordering, kind)
    nodes = [graph.nodes[i] for i in ordering.feature_perm]
    feature_list = FEATURE_HEADER + NODE_SEPARATOR.join(f"Node {node.id}: {escape(node.text or '')}" for node in nodes)
    return SerializedGraph(f"{feature_list}], {edge_list}", ordering, kind)


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, len(self.text[: self.pos].encode("utf-8")))

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def expect(self, literal: str) -> None:
        if not self.text.startswith(literal, self.pos):
            raise self.error(f"Expected {literal!r}")
        self.pos += len(literal)

    def accept(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def read_int(self) -> int:
        start = self.pos
        while self.peek() != "" and self.peek() in "0123456789":
            self.pos += 1
        if start == self.pos:
            raise self.error("Expected a non-negative integer")
        return int(self.text[start : self.pos])

    def read_text(self, terminators: frozenset[str], *, triple: bool = False, until_end: bool = False) -> str:
        escapes = _inverse(_TRIPLE_ESCAPES if triple else _NODE_ESCAPES)
        chars: list[str] = []
        while True:
            char = self.peek()
            if char == "":
                if until_end:
                    return "".join(chars)
                raise self.error("Unterminated text")
            if char in terminators:
                return "".join(chars)
            if char == "\\":
                self.pos += 1
                code = self.peek()
                if code not in escapes:
                    raise self.error(f"Unknown escape sequence '\\{code}'")
                chars.append(escapes[code])
            elif char in "|[]()" or (triple and char == ","):
                raise self.error(f"Unescaped {char!r} in text")
            else:
                chars.append(char)
            self.pos += 1

    def read_feature_list(self) -> list[NodeRecord]:
        self.expect(FEATURE_HEADER)
        nodes: list[NodeRecord] = []
        if self.accept("]"):
            return nodes
        while True:
            self.expect("Node ")
            node = self.read_int()
            self.expect(": ")
            text = self.read_text(frozenset("|]"))
            if self.accept("]"):
                nodes.append(NodeRecord(node, text))
                return nodes
            if not text.endswith(" "):
                raise self.error("Expected ' | ' between nodes")
            self.expect("| ")
            nodes.append(NodeRecord(node, text[:-1]))

    def read_edge_list(self) -> list[tuple[int, int]]:
        self.expect(EDGE_HEADER)
        edges: list[tuple[int, int]] = []
        if self.accept("]"):
            return edges
        while True:
            self.expect("(")
            u = self.read_int()
            self.expect(", ")
            v = self.read_int()
            self.expect(")")
            edges.append((u, v))
            if self.accept("]"):
                return edges
            self.expect(" ")

    def read_triple_list(self) -> list[tuple[str, str, str]]:
        self.expect(TRIPLE_HEADER)
        triples: list[tuple[str, str, str]] = []
        if self.accept("]"):
            return triples
        while True:
            self.expect("(")
            subject = self.read_text(frozenset(",)"), triple=True)
            self.expect(", ")
            relation = self.read_text(frozenset(",)"), triple=True)
            self.expect(", ")
            obj = self.read_text(frozenset(",)"), triple=True)
            self.expect(")")
            triples.append((subject, relation, obj))
            if self.accept("]"):
                return triples
            self.expect(" ")

    def finish(self) -> None:
        if not self.at_end():
            raise self.error("Unexpected trailing input")


def _nodes_from_edges(edges: Sequence[tuple[int, int]]) -> list[NodeRecord]:
    seen: dict[int, None] = {}
    for edge in edges:
        seen.update(dict.fromkeys(edge))
    return [NodeRecord(node) for node in seen]


def parse(text: str, kind: SerializationKind, *, directed: bool = False) -> TextGraph:
    """Read a rendering produced by serialize back into a graph."""
    parser = _Parser(text)
    try:
        if kind is SerializationKind.TRIPLE:
            triples = parser.read_triple_list()
            parser.finish()
            entities: dict[str, int] = {}
            for subject, _, obj in triples:
                entities.setdefault(subject, len(entities))
                entities.setdefault(obj, len(entities))
            return create_graph(
                [NodeRecord(node, entity) for entity, node in entities.items()],
                [(entities[subject], entities[obj]) for subject, _, obj in triples],
                triples=triples,
                directed=True,
                self_loops=True,
            )
        if kind is SerializationKind.EDGE:
            edges = parser.read_edge_list()
            parser.finish()
            return create_graph(_nodes_from_edges(edges), edges, directed=directed)
        nodes = parser.read_feature_list()
        parser.expect(", ")
        edges = parser.read_edge_list()
        parser.finish()
    except GraphConstructionError as error:
        raise GraphSemanticError(str(error)) from error
    try:
        return create_graph(nodes, edges, directed=directed)
    except GraphConstructionError as error:
        raise GraphSemanticError(str(error)) from error


def node_sequence(text: str) -> list[NodeId]:
    """Return the node ids of a rendering in their order of first appearance."""
    if text.startswith(FEATURE_HEADER):
        return list(parse(text, SerializationKind.FEATURE_EDGE, directed=True).node_ids)
    if text.startswith(EDGE_HEADER):
        return list(parse(text, SerializationKind.EDGE, directed=True).node_ids)
    raise SerializationFormatError("Node sequences can only be read from feature or edge lists.")


def kendall_distance(sequence: Sequence[int]) -> float:
    """Return the normalized Kendall tau distance between the sequence and its ascending order."""
    if len(sequence) < 2:
        return 0.0
    tau, _ = kendalltau(np.arange(len(sequence)), np.argsort(np.argsort(sequence)))
    return float((1.0 - tau) / 2.0)


def random_ordering(graph: TextGraph, rng: np.random.Generator, *, seed: Optional[int] = None) -> Ordering:
    """Draw one uniform permutation for each kind of graph element."""
    return Ordering(
        tuple(int(i) for i in rng.permutation(len(graph.nodes))),
        tuple(int(i) for i in rng.permutation(len(graph.edges))),
        tuple(int(i) for i in rng.permutation(len(graph.triples))),
        seed=seed,
    )


def gen_orderings(graph: TextGraph, m: int, seed: int) -> list[Ordering]:
    """Return m candidate orderings, the first of which is the identity."""
    if m < 1:
        raise ValueError(f"Need at least one ordering, got m={m}.")
    rng = np.random.default_rng(seed)
    return [Ordering.identity(graph)] + [random_ordering(graph, rng, seed=seed) for _ in range(m - 1)]


def default_kind(graph: TextGraph) -> SerializationKind:
    """Return the richest kind the graph can be rendered in."""
    if graph.triples:
        return SerializationKind.TRIPLE
    if graph.has_text:
        return SerializationKind.FEATURE_EDGE
    return SerializationKind.EDGE
