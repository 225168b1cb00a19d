"""Contains the JSONL codec of graph records and a file-backed dataset gateway."""
from __future__ import annotations

import json
import logging
import warnings
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any, Optional, Union

from graphsos.domain.errors import GraphConstructionError
from graphsos.domain.graph import GraphRecord, NodeRecord, create_graph
from graphsos.service.gateway import DatasetGateway

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _entity_graph(triples: Sequence[Sequence[str]]) -> tuple[list[NodeRecord], list[tuple[int, int]]]:
    ids: dict[str, int] = {}
    for subject, _, obj in triples:
        for entity in (subject, obj):
            ids.setdefault(entity, len(ids))
    nodes = [NodeRecord(node, entity) for entity, node in ids.items()]
    return nodes, [(ids[subject], ids[obj]) for subject, _, obj in triples]


def _optional_str(obj: Mapping[str, Any], key: str) -> Optional[str]:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise GraphConstructionError(f"Field {key!r} must be a string, got {value!r}.")
    return value


def decode_record(obj: Mapping[str, Any]) -> GraphRecord:
    """Create a graph record from one decoded JSON object, ignoring unknown fields."""
    try:
        triples = [tuple(triple) for triple in obj.get("triples", [])]
        if any(len(triple) != 3 for triple in triples):  # noqa: PLR2004
            raise GraphConstructionError("Every triple needs a subject, a relation and an object.")
        if "nodes" in obj:
            nodes = [NodeRecord(node["id"], node.get("text"), node.get("label")) for node in obj["nodes"]]
            edges = [tuple(edge) for edge in obj.get("edges", [])]
        else:
            nodes, entity_edges = _entity_graph(triples)
            edges = [tuple(edge) for edge in obj.get("edges", entity_edges)]
        if any(len(edge) != 2 for edge in edges):  # noqa: PLR2004
            raise GraphConstructionError("Every edge needs exactly two endpoints.")
        graph = create_graph(
            nodes,
            edges,  # type: ignore[arg-type]
            triples=triples,  # type: ignore[arg-type]
            directed=bool(obj.get("directed", bool(triples) and "nodes" not in obj)),
            self_loops=bool(obj.get("self_loops", False)),
        )
    except (KeyError, TypeError) as error:
        raise GraphConstructionError(f"Malformed graph record: {error!r}.") from error
    target = obj.get("target")
    if target is not None and (not isinstance(target, int) or target not in graph):
        raise GraphConstructionError(f"Target {target!r} is not a node of the graph.")
    return GraphRecord(graph, _optional_str(obj, "question"), _optional_str(obj, "answer"), target)


def _encode_node(node: NodeRecord) -> dict[str, Any]:
    obj: dict[str, Any] = {"id": node.id}
    if node.text is not None:
        obj["text"] = node.text
    if node.label is not None:
        obj["label"] = node.label
    return obj


def encode_record(record: GraphRecord) -> dict[str, Any]:
    """Return the JSON object representing the record."""
    graph = record.graph
    obj: dict[str, Any] = {
        "nodes": [_encode_node(node) for node in graph.nodes],
        "edges": [list(edge) for edge in graph.edges],
    }
    if graph.triples:
        obj["triples"] = [list(triple) for triple in graph.triples]
    if graph.directed:
        obj["directed"] = True
    if graph.self_loops:
        obj["self_loops"] = True
    for key in ("question", "answer", "target"):
        value = getattr(record, key)
        if value is not None:
            obj[key] = value
    return obj


def read_records(path: PathLike) -> list[GraphRecord]:
    """Read every graph record of a JSONL file, skipping blank lines."""
    records = []
    dropped = 0
    with open(path, encoding="utf-8") as file:
        for number, line in enumerate(file, start=1):
            if not line.strip():
                continue
            try:
                record = decode_record(json.loads(line))
            except json.JSONDecodeError as error:
                raise GraphConstructionError(f"{path}:{number}: invalid JSON ({error.msg}).") from error
            except GraphConstructionError as error:
                raise GraphConstructionError(f"{path}:{number}: {error}") from error
            dropped += record.graph.duplicates_dropped
            records.append(record)
    if dropped:
        warnings.warn(f"Dropped {dropped} duplicate edges while reading {path}.", category=UserWarning, stacklevel=2)
    logger.info(f"Read {len(records)} graph records from {path}")
    return records


def write_records(records: Iterable[GraphRecord], path: PathLike) -> None:
    """Write the graph records as one JSON object per line."""
    with open(path, "w", encoding="utf-8") as file:
        for record in records:
            file.write(json.dumps(encode_record(record), ensure_ascii=False) + "\n")


class JsonlDatasetGateway(DatasetGateway):
    """Gateway for graph records stored in a JSONL file."""

    def __init__(self, path: PathLike) -> None:
        """Initialize the gateway."""
        self.path = Path(path)
        self._records: Optional[list[GraphRecord]] = None

    def records(self) -> list[GraphRecord]:
        """Return all graph records, reading the file on first access."""
        if self._records is None:
            self._records = read_records(self.path)
        return self._records
