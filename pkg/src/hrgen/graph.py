"""Hypergraph container, edge-list I/O and BFS subgraph sampling."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be turned into a usable graph."""


@dataclass(frozen=True)
class Edge:
    """A hyperedge over an ordered tuple of distinct vertices.

    Terminal edges are plain graph edges (always two endpoints). Nonterminal
    edges carry a rank equal to their endpoint count and an optional ``link``
    used to tie the edge to a derivation slot.
    """

    nodes: tuple[int, ...]
    nonterminal: bool = False
    link: int | None = None

    def __post_init__(self):
        if len(self.nodes) < 1 or len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"edge endpoints must be distinct: {self.nodes}")
        if not self.nonterminal and len(self.nodes) != 2:
            raise ValueError(f"terminal edges have two endpoints, got {self.nodes}")

    @property
    def rank(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Immutable hypergraph. Input graphs and generated graphs only hold terminal edges.

    Equality ignores vertex and edge order (and labels).
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...] = ()
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        seen = set()
        for e in self.edges:
            for v in e.nodes:
                if v not in vs:
                    raise ValueError(f"edge {e.nodes} uses unknown vertex {v}")
            if not e.nonterminal:
                key = frozenset(e.nodes)
                if key in seen:
                    raise ValueError(f"duplicate terminal edge {e.nodes}")
                seen.add(key)

    def _key(self):
        terms = frozenset(frozenset(e.nodes) for e in self.edges if not e.nonterminal)
        nts = sorted(e.nodes for e in self.edges if e.nonterminal)
        return frozenset(self.vertices), terms, tuple(nts)

    def __eq__(self, other):
        return isinstance(other, Hypergraph) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @classmethod
    def from_edges(cls, pairs: Iterable[Sequence[int]], vertices: Iterable[int] | None = None,
                   labels=None) -> "Hypergraph":
        """Build a simple graph from vertex pairs, dropping loops and duplicates."""
        seen = set()
        edges = []
        vset = set(vertices) if vertices is not None else set()
        for u, v in pairs:
            u, v = int(u), int(v)
            vset.add(u)
            vset.add(v)
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key in seen:
                continue
            seen.add(key)
            edges.append(Edge(key))
        return cls(tuple(sorted(vset)), tuple(edges), labels)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return sum(1 for e in self.edges if not e.nonterminal)

    def terminal_edges(self) -> list[tuple[int, int]]:
        return [e.nodes for e in self.edges if not e.nonterminal]

    def nonterminal_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.nonterminal]

    @cached_property
    def adj(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = {v: set() for v in self.vertices}
        for e in self.edges:
            if not e.nonterminal:
                u, v = e.nodes
                out[u].add(v)
                out[v].add(u)
        return out

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj.values()), default=0)

    def degrees(self) -> np.ndarray:
        return np.array([len(self.adj[v]) for v in self.vertices], dtype=np.int64)

    def components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for s in self.vertices:
            if s in seen:
                continue
            seen.add(s)
            comp = [s]
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.adj[u]:
                    if w not in seen:
                        seen.add(w)
                        comp.append(w)
                        queue.append(w)
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return self.n_vertices > 0 and len(self.components()) == 1

    def is_simple(self) -> bool:
        return all(not e.nonterminal for e in self.edges)

    def induced_subgraph(self, vertices: Iterable[int]) -> "Hypergraph":
        keep = set(vertices)
        pairs = [e.nodes for e in self.edges
                 if not e.nonterminal and e.nodes[0] in keep and e.nodes[1] in keep]
        return Hypergraph.from_edges(pairs, vertices=keep)

    def relabeled(self) -> "Hypergraph":
        """Copy with vertices renumbered densely 0..n-1 in ascending order.

        ``labels`` of the result maps each new id to the original id.
        """
        index = {v: i for i, v in enumerate(self.vertices)}
        labels = (tuple(self.labels[v] for v in self.vertices)
                  if self.labels is not None else self.vertices)
        edges = tuple(Edge(tuple(index[v] for v in e.nodes), e.nonterminal, e.link)
                      for e in self.edges)
        return Hypergraph(tuple(range(self.n_vertices)), edges, labels)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.terminal_edges())
        return g

    def __repr__(self):
        nt = len(self.edges) - self.n_edges
        extra = f", nonterminals={nt}" if nt else ""
        return f"Hypergraph(n={self.n_vertices}, m={self.n_edges}{extra})"


def largest_component(g: Hypergraph) -> Hypergraph:
    comps = g.components()
    if len(comps) <= 1:
        return g
    best = max(comps, key=lambda c: (len(c), -min(c)))
    sub = g.induced_subgraph(best)
    if g.labels is None:
        return sub
    return Hypergraph(sub.vertices, sub.edges, g.labels)


def read_edge_pairs(path: str | os.PathLike) -> list[tuple[int, int]]:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith(("#", "%")):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphFormatError(f"{path}:{lineno}: expected two vertex ids")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: non-integer vertex id") from None
    return pairs


def load_edge_list(path: str | os.PathLike, largest_cc: bool = True,
                   strict: bool = False) -> Hypergraph:
    """Read a whitespace-separated edge list into a simple undirected graph.

    Vertices are remapped to 0..n-1 (ascending original id); ``labels`` keeps
    the original ids. With ``strict=True`` a disconnected graph raises instead
    of being cut down to its largest component.
    """
    pairs = read_edge_pairs(path)
    g = Hypergraph.from_edges(pairs)
    if g.n_edges == 0:
        raise GraphFormatError(f"{path}: no edges after removing self-loops")
    g = g.relabeled()
    if not g.is_connected():
        if strict:
            raise GraphFormatError(f"{path}: graph has {len(g.components())} components")
        if largest_cc:
            g = largest_component(g).relabeled()
    return g


def write_edge_list(g: Hypergraph, path: str | os.PathLike, header: str | None = None) -> None:
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for u, v in sorted(tuple(sorted(e)) for e in g.terminal_edges()):
            fh.write(f"{u} {v}\n")


@dataclass(frozen=True)
class SampleSpec:
    """Number of BFS samples ``k``, nodes per sample ``s`` and the RNG seed."""

    k: int = 4
    s: int = 500
    seed: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")


def bfs_nodes(g: Hypergraph, start: int, limit: int) -> list[int]:
    """First ``limit`` vertices of a BFS from ``start`` (neighbors in ascending id order)."""
    order = [start]
    seen = {start}
    queue = deque([start])
    while queue and len(order) < limit:
        u = queue.popleft()
        for w in sorted(g.adj[u]):
            if w not in seen:
                seen.add(w)
                order.append(w)
                queue.append(w)
                if len(order) >= limit:
                    break
    return order


def bfs_sample(g: Hypergraph, spec: SampleSpec) -> list[Hypergraph]:
    """Node-induced subgraphs grown by BFS from uniformly random start vertices.

    Samples may overlap; each is independent given the seed.
    """
    rng = np.random.default_rng(spec.seed)
    size = min(spec.s, g.n_vertices)
    out = []
    for _ in range(spec.k):
        if size >= g.n_vertices:
            out.append(g)
            continue
        start = g.vertices[int(rng.integers(g.n_vertices))]
        out.append(g.induced_subgraph(bfs_nodes(g, start, size)))
    return out
