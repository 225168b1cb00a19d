from __future__ import annotations

import pytest

from graphsos.domain.errors import GraphConstructionError
from graphsos.domain.graph import edge_homophily
from graphsos.domain.synth import synth_planted_graph


@pytest.mark.parametrize("target_h", [0.0, 1.0, 0.5])
def test_planted_homophily_is_exact(target_h: float) -> None:
    graph = synth_planted_graph(100, 2, target_h, 0)
    assert edge_homophily(graph) == target_h
    assert len(graph.edges) == 200


def test_intermediate_homophily() -> None:
    graph = synth_planted_graph(200, 4, 0.3, 7)
    assert 0.25 <= edge_homophily(graph) <= 0.35
    assert {node.label for node in graph} == {"class0", "class1", "class2", "class3"}


def test_nodes_carry_text_and_labels() -> None:
    graph = synth_planted_graph(10, 2, 0.5, 1, mean_degree=2.0)
    assert graph.has_text
    assert graph.is_labeled
    for node in graph:
        assert node.label is not None
        assert node.text is not None
        assert node.text.startswith(f"{node.label}w")


def test_same_seed_gives_same_graph() -> None:
    assert synth_planted_graph(50, 3, 0.6, 9) == synth_planted_graph(50, 3, 0.6, 9)


def test_infeasible_graph_is_rejected() -> None:
    with pytest.raises(GraphConstructionError, match="Cannot place"):
        synth_planted_graph(4, 2, 1.0, 0)


@pytest.mark.parametrize(
    ("n", "classes", "target_h", "mean_degree"),
    [(5, 1, 0.5, 4.0), (2, 3, 0.5, 4.0), (10, 2, 1.5, 4.0), (10, 2, 0.5, 0.0)],
)
def test_invalid_arguments_are_rejected(n: int, classes: int, target_h: float, mean_degree: float) -> None:
    with pytest.raises(GraphConstructionError):
        synth_planted_graph(n, classes, target_h, 0, mean_degree=mean_degree)
