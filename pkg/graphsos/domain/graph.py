"""Contains the text-attributed graph and the metrics computed on it."""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterator, Optional, Union

import networkx as nx

from .custom_types import Edge, LabelAssignment, NodeId, Triple
from .errors import GraphConstructionError, UndefinedMetricError, UnknownNodeError


@dataclass(frozen=True)
class NodeRecord:
    """A node together with its optional attribute text and class label."""

    id: NodeId
    text: Optional[str] = None
    label: Optional[str] = None


def create_graph(
    nodes: Iterable[NodeRecord],
    edges: Iterable[tuple[int, int]],
    *,
    triples: Iterable[Triple] = (),
    directed: bool = False,
    self_loops: bool = False,
) -> TextGraph:
    """Create a new graph, deduplicating repeated edges."""

    def validate_nodes(nodes: list[NodeRecord]) -> None:
        ids = [node.id for node in nodes]
        if any(not isinstance(node_id, int) or node_id < 0 for node_id in ids):
            raise GraphConstructionError("Node ids must be non-negative integers.")
        if len(set(ids)) != len(ids):
            raise GraphConstructionError("Node ids must be unique.")
        with_text = sum(node.text is not None for node in nodes)
        if with_text not in (0, len(nodes)):
            raise GraphConstructionError("Either all nodes or no node must carry text.")

    def normalize(edge: tuple[int, int]) -> Edge:
        u, v = edge
        if directed:
            return (u, v)
        return (min(u, v), max(u, v))

    def validate_edge(edge: Edge, known: set[NodeId]) -> None:
        u, v = edge
        for endpoint in (u, v):
            if endpoint not in known:
                raise GraphConstructionError(f"Edge {edge} references unknown node {endpoint}.")
        if u == v and not self_loops:
            raise GraphConstructionError(f"Self-loop on node {u} is not allowed.")

    node_list = list(nodes)
    validate_nodes(node_list)
    known = {node.id for node in node_list}
    seen: dict[Edge, None] = {}
    dropped = 0
    for edge in edges:
        normalized = normalize((int(edge[0]), int(edge[1])))
        validate_edge(normalized, known)
        if normalized in seen:
            dropped += 1
            continue
        seen[normalized] = None
    return TextGraph(
        tuple(node_list),
        tuple(seen),
        triples=tuple((str(s), str(r), str(o)) for s, r, o in triples),
        directed=directed,
        self_loops=self_loops,
        duplicates_dropped=dropped,
    )


@dataclass(frozen=True, eq=False)
class TextGraph:
    """An immutable, optionally text-attributed and labeled graph."""

    nodes: tuple[NodeRecord, ...]
    edges: tuple[Edge, ...]
    triples: tuple[Triple, ...] = ()
    directed: bool = False
    self_loops: bool = False
    duplicates_dropped: int = 0

    @cached_property
    def _index(self) -> dict[NodeId, NodeRecord]:
        return {node.id: node for node in self.nodes}

    @cached_property
    def nx_graph(self) -> Union[nx.Graph, nx.DiGraph]:
        """Return a networkx view of the graph's structure."""
        graph = nx.DiGraph() if self.directed else nx.Graph()
        graph.add_nodes_from(node.id for node in self.nodes)
        graph.add_edges_from(self.edges)
        return graph

    @property
    def node_ids(self) -> tuple[NodeId, ...]:
        """Return the ids of all nodes in their stored order."""
        return tuple(node.id for node in self.nodes)

    @property
    def has_text(self) -> bool:
        """Return True if the nodes carry attribute text."""
        return bool(self.nodes) and self.nodes[0].text is not None

    @property
    def is_labeled(self) -> bool:
        """Return True if every node carries a class label."""
        return all(node.label is not None for node in self.nodes)

    def neighbors(self, node: NodeId) -> list[NodeId]:
        """Return the (out-)neighbors of the node in ascending order."""
        if node not in self:
            raise UnknownNodeError(f"Node {node} not present in graph")
        return sorted(self.nx_graph.successors(node) if self.directed else self.nx_graph.neighbors(node))

    def unlabeled(self) -> TextGraph:
        """Return a copy of the graph without class labels."""
        return replace(self, nodes=tuple(replace(node, label=None) for node in self.nodes))

    def __getitem__(self, node: NodeId) -> NodeRecord:
        """Return the record of the node with the given id."""
        try:
            return self._index[node]
        except KeyError as error:
            raise UnknownNodeError(f"Node {node} not present in graph") from error

    def __contains__(self, node: object) -> bool:
        """Check if the graph contains a node with the given id."""
        return node in self._index

    def __iter__(self) -> Iterator[NodeRecord]:
        """Iterate over the node records."""
        return iter(self.nodes)

    def __len__(self) -> int:
        """Return the number of nodes."""
        return len(self.nodes)

    def _key(self) -> tuple[bool, frozenset[NodeRecord], frozenset[Edge], frozenset[Triple]]:
        return (self.directed, frozenset(self.nodes), frozenset(self.edges), frozenset(self.triples))

    def __eq__(self, other: object) -> bool:
        """Return True if both graphs hold the same nodes, edges and triples irrespective of their order."""
        if not isinstance(other, TextGraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        """Return the hash of the graph's content."""
        return hash(self._key())


@dataclass(frozen=True)
class GraphRecord:
    """One line of a graph interchange file."""

    graph: TextGraph
    question: Optional[str] = None
    answer: Optional[str] = None
    target: Optional[NodeId] = None


def node_labels(graph: TextGraph) -> dict[NodeId, str]:
    """Return the label assignment stored on the graph's nodes."""
    labels: dict[NodeId, str] = {}
    for node in graph:
        if node.label is None:
            raise UndefinedMetricError(f"Node {node.id} carries no label.")
        labels[node.id] = node.label
    return labels


def edge_homophily(graph: TextGraph, labels: Optional[LabelAssignment] = None) -> float:
    """Return the fraction of edges whose endpoints share a class label."""
    if not graph.edges:
        raise UndefinedMetricError("Edge homophily is undefined for a graph without edges.")
    if labels is None:
        labels = node_labels(graph)

    def label_of(node: NodeId) -> str:
        try:
            return labels[node]
        except KeyError as error:
            raise UndefinedMetricError(f"Node {node} carries no label.") from error

    same = sum(label_of(u) == label_of(v) for u, v in graph.edges)
    return same / len(graph.edges)


def k_hop_neighborhood(graph: TextGraph, v: NodeId, k: int) -> frozenset[NodeId]:
    """Return the nodes at shortest-path distance 1 to k from v."""
    if v not in graph:
        raise UnknownNodeError(f"Node {v} not present in graph")
    if k < 0:
        raise ValueError("Hop count must not be negative.")
    distances = nx.single_source_shortest_path_length(graph.nx_graph, v, cutoff=k)
    return frozenset(node for node, distance in distances.items() if distance >= 1)


def induced_subgraph(graph: TextGraph, keep: Iterable[NodeId]) -> TextGraph:
    """Return the subgraph holding the kept nodes and all edges between them."""
    kept = set(keep)
    unknown = kept - set(graph.node_ids)
    if unknown:
        raise UnknownNodeError(f"Nodes {sorted(unknown)} not present in graph")
    if len(kept) == len(graph):
        return graph
    entities = {node.text for node in graph if node.id in kept}
    return TextGraph(
        tuple(node for node in graph if node.id in kept),
        tuple((u, v) for u, v in graph.edges if u in kept and v in kept),
        triples=tuple(triple for triple in graph.triples if triple[0] in entities and triple[2] in entities),
        directed=graph.directed,
        self_loops=graph.self_loops,
    )


def same_class_neighbor_proportion(
    subgraph: TextGraph, target: NodeId, labels: Optional[Mapping[NodeId, str]] = None
) -> float:
    """Return the share of non-target nodes that carry the target's label."""
    if labels is None:
        labels = node_labels(subgraph)
    others = [node for node in subgraph.node_ids if node != target]
    if target not in subgraph or not others:
        raise UndefinedMetricError("The proportion needs the target and at least one other node.")
    return sum(labels[node] == labels[target] for node in others) / len(others)
