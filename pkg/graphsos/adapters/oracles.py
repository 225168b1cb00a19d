"""Contains the builtin scoring oracle."""
from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.special import logit

from graphsos.domain.custom_types import LabelAssignment
from graphsos.domain.errors import UndefinedMetricError
from graphsos.domain.graph import TextGraph, edge_homophily, node_labels
from graphsos.domain.serialization import SerializedGraph, parse
from graphsos.service.backends import ScoringOracle

H_MIN = 0.01
H_MAX = 0.99


class HomophilyOracle(ScoringOracle):
    """Scores a subgraph with the edge homophily of its nodes' labels in the graph it was sampled from."""

    def __init__(self, labels: Optional[LabelAssignment] = None) -> None:
        """Initialize the oracle."""
        self.labels = labels

    def logits(self, serialized: SerializedGraph) -> tuple[float, float]:
        """Return the logits (0, logit(h)) with the homophily h clamped away from 0 and 1."""
        if self.labels is None:
            raise UndefinedMetricError("The homophily oracle needs the labels of the sampled graph.")
        subgraph = parse(serialized.text, serialized.kind)
        h = float(np.clip(edge_homophily(subgraph, self.labels), H_MIN, H_MAX))
        return 0.0, float(logit(h))

    def for_graph(self, graph: TextGraph) -> HomophilyOracle:
        """Return an oracle scoring subgraphs of the labeled graph."""
        return HomophilyOracle(node_labels(graph))

    def __repr__(self) -> str:
        """Return a string representation of the oracle."""
        return f"{self.__class__.__name__}()"
