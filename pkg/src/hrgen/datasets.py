"""Bundled and locally supplied graphs."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .graph import Hypergraph, load_edge_list

YEAST_ENV = "HRGEN_YEAST"


def karate() -> Hypergraph:
    """Zachary's karate club (34 vertices, 78 edges)."""
    with resources.as_file(resources.files("hrgen") / "data" / "karate.txt") as p:
        return load_edge_list(p)


def six_vertex_example() -> Hypergraph:
    """Six-vertex, eight-edge example graph used to illustrate clique trees."""
    pairs = [(0, 1), (0, 4), (1, 2), (1, 4), (2, 3), (2, 4), (3, 5), (4, 5)]
    return Hypergraph.from_edges(pairs)


def yeast(path: str | os.PathLike | None = None) -> Hypergraph | None:
    """Yeast protein-interaction edge list from ``path`` or ``$HRGEN_YEAST``.

    The largest component is returned; ``None`` if no file is available.
    """
    path = path or os.environ.get(YEAST_ENV)
    if not path or not Path(path).is_file():
        return None
    return load_edge_list(path)
