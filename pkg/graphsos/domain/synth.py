"""Contains the generator for synthetic labeled graphs with a planted homophily level."""
from __future__ import annotations

import numpy as np

from .errors import GraphConstructionError
from .graph import NodeRecord, TextGraph, create_graph

VOCABULARY_SIZE = 12
WORDS_PER_NODE = 6


def planted_text(label: str, node: int) -> str:
    """Return the attribute text of a synthetic node; nodes of one class share a vocabulary."""
    return " ".join(f"{label}w{(node * 5 + i) % VOCABULARY_SIZE}" for i in range(WORDS_PER_NODE))


def synth_planted_graph(n: int, classes: int, target_h: float, seed: int, *, mean_degree: float = 4.0) -> TextGraph:
    """Create a labeled graph whose edge homophily is as close as possible to the target."""
    if not n >= classes >= 2:
        raise GraphConstructionError(f"Need n >= classes >= 2, got n={n} and classes={classes}.")
    if not 0.0 <= target_h <= 1.0:
        raise GraphConstructionError(f"Target homophily must lie in [0, 1], got {target_h}.")
    if mean_degree <= 0:
        raise GraphConstructionError(f"Mean degree must be positive, got {mean_degree}.")
    rng = np.random.default_rng(seed)
    classes_of = rng.permutation(np.arange(n) % classes)
    n_edges = max(1, round(n * mean_degree / 2))
    n_intra = round(target_h * n_edges)
    n_inter = n_edges - n_intra
    rows, cols = np.triu_indices(n, k=1)
    same = classes_of[rows] == classes_of[cols]
    intra_pool = np.flatnonzero(same)
    inter_pool = np.flatnonzero(~same)
    if n_intra > len(intra_pool) or n_inter > len(inter_pool):
        raise GraphConstructionError(
            f"Cannot place {n_intra} intra-class and {n_inter} inter-class edges on {n} nodes "
            f"({len(intra_pool)} and {len(inter_pool)} possible)."
        )
    chosen = np.sort(
        np.concatenate(
            [
                rng.choice(intra_pool, size=n_intra, replace=False),
                rng.choice(inter_pool, size=n_inter, replace=False),
            ]
        )
    )
    nodes = [
        NodeRecord(node, planted_text(f"class{classes_of[node]}", node), f"class{classes_of[node]}")
        for node in range(n)
    ]
    return create_graph(nodes, [(int(rows[index]), int(cols[index])) for index in chosen])
