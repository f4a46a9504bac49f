"""Clique trees via maximum cardinality search.

The pipeline is ``mcs_order`` -> ``triangulate`` -> ``build_clique_tree``;
``clique_tree`` runs all three. Every vertex and edge of the input lands in
the tree: bags cover V, each edge is assigned to exactly one bag holding both
of its endpoints, and the bags containing any vertex form a subtree.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .graph import Hypergraph


class CliqueTreeError(RuntimeError):
    pass


@dataclass(frozen=True)
class EliminationOrder:
    """MCS visit order; vertices are eliminated in reverse.

    ``width_achieved`` is the width of the clique tree the order induces, an
    upper bound on the treewidth. ``max_degree`` is recorded alongside it.
    """

    order: tuple[int, ...]
    width_achieved: int
    max_degree: int

    @property
    def position(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.order)}


def _mcs_visit(g: Hypergraph) -> list[int]:
    weight = {v: 0 for v in g.vertices}
    numbered: set[int] = set()
    heap = [(0, v) for v in g.vertices]
    heapq.heapify(heap)
    order = []
    while heap:
        w, v = heapq.heappop(heap)
        if v in numbered or -w != weight[v]:
            continue
        numbered.add(v)
        order.append(v)
        for u in g.adj[v]:
            if u not in numbered:
                weight[u] += 1
                heapq.heappush(heap, (-weight[u], u))
    return order


def _higher_adjacency(adj: dict[int, set[int]], order: Sequence[int]) -> dict[int, set[int]]:
    """Higher neighbours of each vertex in the filled graph of ``order``.

    Eliminating in reverse visit order, the neighbours of the vertex being
    removed are pushed onto the next of them to be removed (Rose-Tarjan-Lueker).
    """
    pos = {v: i for i, v in enumerate(order)}
    madj = {v: {u for u in adj[v] if pos[u] < pos[v]} for v in order}
    for v in reversed(order):
        higher = madj[v]
        if higher:
            p = max(higher, key=pos.__getitem__)
            madj[p].update(u for u in higher if u != p)
    return madj


def mcs_order(g: Hypergraph) -> EliminationOrder:
    """Maximum cardinality search: repeatedly visit the unvisited vertex with the
    most visited neighbours (ties to the smallest id)."""
    order = _mcs_visit(g)
    madj = _higher_adjacency(g.adj, order)
    width = max((len(h) for h in madj.values()), default=0)
    return EliminationOrder(tuple(order), width, g.max_degree())


def triangulate(g: Hypergraph, order: EliminationOrder) -> Hypergraph:
    """``g`` plus the fill edges produced by eliminating in reverse visit order."""
    if set(order.order) != set(g.vertices):
        raise ValueError("elimination order does not cover the graph's vertices")
    madj = _higher_adjacency(g.adj, order.order)
    pairs = [(v, u) for v in order.order for u in madj[v]]
    return Hypergraph.from_edges(pairs, vertices=g.vertices)


@dataclass
class CliqueTree:
    """Rooted tree of vertex bags with assigned edge sets.

    ``parent[root] == -1``; ``children`` lists are kept in ascending index order.
    """

    bags: list[tuple[int, ...]]
    assigned_edges: list[list[tuple[int, int]]]
    parent: list[int]
    children: list[list[int]] = field(init=False)
    root: int = field(init=False)

    def __post_init__(self):
        self.bags = [tuple(sorted(b)) for b in self.bags]
        self.assigned_edges = [[tuple(sorted(e)) for e in es] for es in self.assigned_edges]
        roots = [i for i, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise CliqueTreeError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        self.children = [[] for _ in self.bags]
        for i, p in enumerate(self.parent):
            if p >= 0:
                self.children[p].append(i)

    def __len__(self):
        return len(self.bags)

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def leaves(self) -> list[int]:
        return [i for i, ch in enumerate(self.children) if not ch]

    def preorder(self) -> list[int]:
        """Depth-first preorder from the root, children in index order."""
        out, stack = [], [self.root]
        seen = set()
        while stack:
            node = stack.pop()
            if node in seen:
                raise CliqueTreeError("tree structure contains a cycle")
            seen.add(node)
            out.append(node)
            stack.extend(reversed(self.children[node]))
        return out

    def depths(self) -> list[int]:
        depth = [0] * len(self.bags)
        for node in self.preorder():
            for c in self.children[node]:
                depth[c] = depth[node] + 1
        return depth

    def to_json(self) -> str:
        records = [{"id": i, "parent": p, "bag": list(b), "assigned_edges": [list(e) for e in es]}
                   for i, (b, es, p) in enumerate(zip(self.bags, self.assigned_edges, self.parent))]
        return json.dumps(records)

    @classmethod
    def from_json(cls, text: str) -> "CliqueTree":
        records = sorted(json.loads(text), key=lambda r: r["id"])
        return cls([r["bag"] for r in records],
                   [[tuple(e) for e in r["assigned_edges"]] for r in records],
                   [r["parent"] for r in records])


def maximal_cliques(chordal: Hypergraph, order: Sequence[int]) -> list[tuple[int, ...]]:
    """Maximal cliques of a chordal graph given a zero-fill visit order."""
    pos = {v: i for i, v in enumerate(order)}
    madj = {v: {u for u in chordal.adj[v] if pos[u] < pos[v]} for v in order}
    follower = {}
    for v in order:
        if madj[v]:
            follower[v] = max(madj[v], key=pos.__getitem__)
    absorbed = set()
    for u, p in follower.items():
        if len(madj[u]) == len(madj[p]) + 1:
            absorbed.add(p)
    return [tuple(sorted(madj[v] | {v})) for v in order if v not in absorbed]


def _clique_forest(chordal: Hypergraph, order: Sequence[int]):
    """Maximal cliques plus maximum-weight spanning tree links between them.

    Walking the visit order, a vertex whose higher neighbourhood is exactly the
    clique of its follower extends that clique; otherwise it opens a new clique
    linked to the follower's clique through the separator of its higher
    neighbours. Runs in time linear in the size of the filled graph.
    """
    pos = {v: i for i, v in enumerate(order)}
    madj = {v: [u for u in chordal.adj[v] if pos[u] < pos[v]] for v in order}
    cliques: list[list[int]] = []
    links: list[tuple[int, int]] = []
    clique_of: dict[int, int] = {}
    tail: list[int] = []
    for v in order:
        higher = madj[v]
        if not higher:
            clique_of[v] = len(cliques)
            cliques.append([v])
            tail.append(v)
            continue
        p = max(higher, key=pos.__getitem__)
        c = clique_of[p]
        if len(higher) == len(madj[p]) + 1 and tail[c] == p:
            cliques[c].append(v)
            tail[c] = v
            clique_of[v] = c
        else:
            clique_of[v] = len(cliques)
            cliques.append(higher + [v])
            tail.append(v)
            links.append((c, clique_of[v]))
    return cliques, links


def build_clique_tree(g: Hypergraph, chordal: Hypergraph, order: EliminationOrder) -> CliqueTree:
    """Clique tree over the maximal cliques of ``chordal``.

    Bags are indexed in lexicographic order of their sorted vertex tuples.
    Tree links form a maximum-weight spanning tree on clique intersection
    sizes. The root is the first bag holding the first visited vertex. Each
    edge of ``g`` goes to the bag nearest the root containing both endpoints.
    """
    raw, links = _clique_forest(chordal, order.order)
    keyed = sorted((tuple(sorted(c)), i) for i, c in enumerate(raw))
    bags = [k for k, _ in keyed]
    index = {old: new for new, (_, old) in enumerate(keyed)}
    nbrs: list[list[int]] = [[] for _ in bags]
    for a, b in links:
        nbrs[index[a]].append(index[b])
        nbrs[index[b]].append(index[a])
    root = min(i for i, bag in enumerate(bags) if order.order[0] in bag)
    parent = [-2] * len(bags)
    parent[root] = -1
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in sorted(nbrs[u]):
            if parent[w] == -2:
                parent[w] = u
                queue.append(w)
    if -2 in parent:
        raise CliqueTreeError("clique graph is disconnected; is the input connected?")

    tree = assign_edges(g, CliqueTree(bags, [[] for _ in bags], parent))
    report = validate_clique_tree(g, tree)
    if not report.ok:
        raise CliqueTreeError(f"constructed clique tree is invalid: {report}")
    return tree


def assign_edges(g: Hypergraph, tree: CliqueTree) -> CliqueTree:
    """Copy of ``tree`` with each edge of ``g`` assigned to the shallowest bag
    holding both endpoints (ties to the smallest node index)."""
    containing: dict[int, list[int]] = {v: [] for v in g.vertices}
    for i, bag in enumerate(tree.bags):
        for v in bag:
            if v in containing:
                containing[v].append(i)
    depth = tree.depths()
    assigned: list[list[tuple[int, int]]] = [[] for _ in tree.bags]
    for u, v in g.terminal_edges():
        common = set(containing[u]).intersection(containing[v])
        if not common:
            raise CliqueTreeError(f"edge ({u}, {v}) is not covered by any bag")
        best = min(common, key=lambda i: (depth[i], i))
        assigned[best].append((min(u, v), max(u, v)))
    for es in assigned:
        es.sort()
    return CliqueTree(list(tree.bags), assigned, list(tree.parent))


def clique_tree(g: Hypergraph) -> CliqueTree:
    order = mcs_order(g)
    return build_clique_tree(g, triangulate(g, order), order)


@dataclass
class ValidationReport:
    vertex_cover: bool
    edge_cover: bool
    running_intersection: bool
    uncovered_vertices: list[int] = field(default_factory=list)
    edge_problems: dict[tuple[int, int], str] = field(default_factory=dict)
    disconnected_vertices: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.vertex_cover and self.edge_cover and self.running_intersection


def validate_clique_tree(g: Hypergraph, t: CliqueTree) -> ValidationReport:
    """Check vertex cover, exactly-once edge cover and running intersection."""
    bag_sets = [set(b) for b in t.bags]
    covered = set().union(*bag_sets) if bag_sets else set()
    uncovered = sorted(set(g.vertices) - covered)

    problems: dict[tuple[int, int], str] = {}
    owners: dict[tuple[int, int], list[int]] = {}
    for i, es in enumerate(t.assigned_edges):
        for e in es:
            owners.setdefault(tuple(sorted(e)), []).append(i)
            if not set(e) <= bag_sets[i]:
                problems[tuple(sorted(e))] = f"assigned to node {i} whose bag lacks an endpoint"
    graph_edges = {tuple(sorted(e)) for e in g.terminal_edges()}
    for e in graph_edges:
        where = owners.get(e, [])
        if len(where) != 1:
            problems[e] = f"assigned to {len(where)} nodes {where}"
    for e in owners:
        if e not in graph_edges:
            problems[e] = "assigned but not an edge of the graph"

    holding: dict[int, set[int]] = {}
    for i, b in enumerate(t.bags):
        for v in b:
            holding.setdefault(v, set()).add(i)
    disconnected = []
    for v in sorted(covered):
        nodes = holding[v]
        # nodes holding v form a subtree iff exactly one of them has its parent outside
        tops = [i for i in nodes if t.parent[i] not in nodes]
        if len(tops) != 1:
            disconnected.append(v)

    return ValidationReport(not uncovered, not problems, not disconnected,
                            uncovered, problems, disconnected)
