"""Graph comparison metrics: degrees, eigenvector centrality, hop plots,
graphlet orbits and the graphlet correlation distance (GCD)."""

from __future__ import annotations

import csv
import itertools
import math
import os
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse, stats

from .graph import Hypergraph

# orbits of connected 2-4 vertex graphlets, numbered 0..14
N_ORBITS = 15
# non-redundant subset used for the 11-orbit graphlet correlation distance
GCD11_ORBITS = (0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11)


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass
class DegreeDistribution:
    counts: dict[int, int]

    @property
    def n_vertices(self) -> int:
        return sum(self.counts.values())

    @property
    def degree_sum(self) -> int:
        return sum(d * c for d, c in self.counts.items())

    def ccdf(self) -> list[tuple[int, float]]:
        """P(degree >= d) for each observed degree d."""
        n = self.n_vertices
        out, tail = [], n
        for d in sorted(self.counts):
            out.append((d, tail / n))
            tail -= self.counts[d]
        return out

    def power_law_exponent(self, d_min: int = 1) -> float:
        """Discrete power-law MLE on degrees >= d_min (display only)."""
        tail = [(d, c) for d, c in self.counts.items() if d >= d_min]
        n = sum(c for _, c in tail)
        denom = sum(c * math.log(d / (d_min - 0.5)) for d, c in tail)
        return 1.0 + n / denom if denom > 0 else float("nan")


def degree_distribution(g: Hypergraph) -> DegreeDistribution:
    return DegreeDistribution(dict(sorted(Counter(len(a) for a in g.adj.values()).items())))


def adjacency_matrix(g: Hypergraph) -> sparse.csr_matrix:
    index = {v: i for i, v in enumerate(g.vertices)}
    edges = g.terminal_edges()
    rows = [index[u] for u, v in edges] + [index[v] for u, v in edges]
    cols = [index[v] for u, v in edges] + [index[u] for u, v in edges]
    n = g.n_vertices
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


def eigenvector_centrality(g: Hypergraph, tol: float = 1e-8, max_iter: int = 1000) -> np.ndarray:
    """Principal eigenvector of the adjacency matrix by power iteration.

    Iterates on ``A + I`` (same eigenvectors, no oscillation on bipartite
    graphs). Returns unit-norm nonnegative scores ordered like ``g.vertices``.
    """
    A = adjacency_matrix(g)
    n = g.n_vertices
    x = np.full(n, 1.0 / math.sqrt(n))
    converged = False
    for _ in range(max_iter):
        y = A @ x + x
        y /= np.linalg.norm(y)
        step = np.linalg.norm(y - x)
        x = y
        if step <= tol:
            converged = True
            break
    Ax = A @ x
    lam = float(x @ Ax)
    residual = float(np.linalg.norm(Ax - lam * x) / lam) if lam > 0 else float("inf")
    if not converged and residual > tol:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps "
                               f"(residual {residual:.2e})", residual)
    return np.abs(x)


def centrality_cosine_distance(a, b) -> float:
    """1 - cosine similarity of the two score vectors sorted descending, the
    shorter one zero-padded."""
    a = np.sort(np.asarray(a, dtype=float))[::-1]
    b = np.sort(np.asarray(b, dtype=float))[::-1]
    n = max(len(a), len(b))
    a = np.pad(a, (0, n - len(a)))
    b = np.pad(b, (0, n - len(b)))
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine distance is undefined for a zero vector")
    return float(min(1.0, max(0.0, 1.0 - a @ b / (na * nb))))


def mean_sorted_centrality(vectors) -> np.ndarray:
    """Elementwise mean of descending-sorted score vectors (zero-padded)."""
    vs = [np.sort(np.asarray(v, dtype=float))[::-1] for v in vectors]
    n = max(len(v) for v in vs)
    return np.mean([np.pad(v, (0, n - len(v))) for v in vs], axis=0)


def hop_plot(g: Hypergraph, num_sources: int = 50, seed=None) -> np.ndarray:
    """Cumulative number of (source, vertex) pairs within ``x`` hops, ``x = 0, 1, ...``.

    Sources are ``min(num_sources, n)`` distinct vertices drawn uniformly.
    """
    if num_sources < 1:
        raise ValueError("num_sources must be >= 1")
    rng = np.random.default_rng(seed)
    k = min(num_sources, g.n_vertices)
    sources = rng.choice(np.array(g.vertices), size=k, replace=False)
    per_hop = Counter()
    for s in sources:
        dist = {int(s): 0}
        frontier = [int(s)]
        while frontier:
            nxt = []
            for u in frontier:
                for w in g.adj[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        per_hop.update(dist.values())
    hops = max(per_hop) + 1
    return np.cumsum([per_hop[h] for h in range(hops)])


def _classify4(edges: list[tuple[int, int]], x: int) -> int:
    deg = Counter()
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    m, dx = len(edges), deg[x]
    if m == 3:
        if max(deg.values()) == 3:
            return 7 if dx == 3 else 6
        return 4 if dx == 1 else 5
    if m == 4:
        if all(d == 2 for d in deg.values()):
            return 8
        return {1: 9, 2: 10, 3: 11}[dx]
    if m == 5:
        return 12 if dx == 2 else 13
    return 14


def _connected(edges, nodes) -> bool:
    adj = {v: set() for v in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    start = next(iter(nodes))
    seen, stack = {start}, [start]
    while stack:
        for w in adj[stack.pop()] - seen:
            seen.add(w)
            stack.append(w)
    return len(seen) == len(nodes)


def _subgraph_to_induced() -> np.ndarray:
    """Inverse of the matrix taking induced 4-vertex orbit counts to
    non-induced (subgraph) counts, found by enumerating edge subsets of each
    4-vertex graphlet."""
    nodes = (0, 1, 2, 3)
    pairs = list(itertools.combinations(nodes, 2))
    C = np.zeros((11, 11), dtype=np.int64)
    done = set()
    for m in range(3, 7):
        for es in itertools.combinations(pairs, m):
            if not _connected(es, nodes):
                continue
            for x in nodes:
                outer = _classify4(list(es), x)
                if outer in done:
                    continue
                for k in range(3, m + 1):
                    for sub in itertools.combinations(es, k):
                        if len({v for e in sub for v in e}) == 4 and _connected(sub, nodes):
                            C[_classify4(list(sub), x) - 4, outer - 4] += 1
                done.add(outer)
    return np.rint(np.linalg.inv(C)).astype(np.int64)


_INDUCE = _subgraph_to_induced()


def orbit_counts(g: Hypergraph, orbits=GCD11_ORBITS) -> np.ndarray:
    """Graphlet orbit degrees of every vertex (rows follow ``g.vertices``).

    Subgraph (non-induced) counts come from degree, triangle, common-neighbour
    and 4-clique counts; induced counts follow from a fixed integer linear map.
    ``orbits="all"`` returns all 15 orbit columns.
    """
    if orbits == "all":
        orbits = tuple(range(N_ORBITS))
    adj = g.adj
    deg = {v: len(adj[v]) for v in g.vertices}
    tri_e: dict[tuple[int, int], int] = {}
    for u, v in g.terminal_edges():
        a, b = (u, v) if deg[u] <= deg[v] else (v, u)
        t = sum(1 for w in adj[a] if w in adj[b])
        tri_e[(u, v)] = tri_e[(v, u)] = t
    tri = {v: sum(tri_e[(v, u)] for u in adj[v]) // 2 for v in g.vertices}
    spread = {u: sum(deg[w] - 1 for w in adj[u]) for u in g.vertices}

    out = np.zeros((g.n_vertices, N_ORBITS), dtype=np.int64)
    for i, v in enumerate(g.vertices):
        d, t, nv = deg[v], tri[v], adj[v]
        out[i, 0] = d
        out[i, 1] = sum(deg[u] - 1 for u in nv) - 2 * t
        out[i, 2] = d * (d - 1) // 2 - t
        out[i, 3] = t

        common = Counter()
        for u in nv:
            for w in adj[u]:
                if w != v:
                    common[w] += 1
        inner = 0
        k4 = 0
        for a in nv:
            for b in adj[a]:
                if b in nv and a < b:
                    inner += tri_e[(a, b)] - 1
                    k4 += sum(1 for c in adj[a] if c in nv and c in adj[b])
        sub = np.array([
            sum(spread[u] - (d - 1) for u in nv) - 2 * t,                 # 4: P4 end
            sum((d - 1) * (deg[u] - 1) for u in nv) - 2 * t,              # 5: P4 middle
            sum((deg[u] - 1) * (deg[u] - 2) // 2 for u in nv),           # 6: claw leaf
            d * (d - 1) * (d - 2) // 6,                                   # 7: claw centre
            sum(c * (c - 1) // 2 for c in common.values()),               # 8: 4-cycle
            sum(tri[a] - tri_e[(v, a)] for a in nv),                      # 9: paw pendant
            sum(tri_e[(v, a)] * (deg[a] - 2) for a in nv),                # 10: paw side
            t * (d - 2),                                                  # 11: paw hub
            inner,                                                        # 12: diamond side
            sum(tri_e[(v, a)] * (tri_e[(v, a)] - 1) // 2 for a in nv),    # 13: diamond chord
            k4 // 3,                                                      # 14: 4-clique
        ], dtype=np.int64)
        out[i, 4:] = _INDUCE @ sub
    return out[:, list(orbits)]


def graphlet_correlation_matrix(g: Hypergraph, orbits=GCD11_ORBITS) -> np.ndarray:
    """Spearman correlation between orbit columns, with one all-ones dummy row
    appended; undefined correlations (constant columns) are set to 0."""
    counts = orbit_counts(g, orbits)
    counts = np.vstack([counts, np.ones(counts.shape[1], dtype=counts.dtype)])
    ranks = np.apply_along_axis(stats.rankdata, 0, counts)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(ranks, rowvar=False)
    corr = np.nan_to_num(corr, nan=0.0)
    np.fill_diagonal(corr, 1.0)
    return corr


@dataclass
class GcdResult:
    distance: float
    corr_a: np.ndarray
    corr_b: np.ndarray


def gcd_from_matrices(a: np.ndarray, b: np.ndarray) -> float:
    iu = np.triu_indices(a.shape[0], k=1)
    return float(np.linalg.norm(a[iu] - b[iu]))


def gcd(g1: Hypergraph, g2: Hypergraph) -> GcdResult:
    """Graphlet correlation distance: Euclidean distance between the upper
    triangles of the two graphs' orbit correlation matrices."""
    if g1.n_vertices == 0 or g2.n_vertices == 0:
        raise ValueError("GCD needs nonempty graphs")
    a, b = graphlet_correlation_matrix(g1), graphlet_correlation_matrix(g2)
    return GcdResult(gcd_from_matrices(a, b), a, b)


# --- CSV emitters ------------------------------------------------------------

def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _read(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        return list(r)


def write_degree_csv(dist: DegreeDistribution, path: str | os.PathLike) -> None:
    _write(path, ["degree", "count"], sorted(dist.counts.items()))


def read_degree_csv(path) -> DegreeDistribution:
    return DegreeDistribution({int(d): int(c) for d, c in _read(path)})


def write_hop_csv(hops, path) -> None:
    _write(path, ["hop", "pairs"], [(h, int(p)) for h, p in enumerate(hops)])


def read_hop_csv(path) -> np.ndarray:
    return np.array([int(p) for _, p in _read(path)], dtype=np.int64)


def write_centrality_csv(scores, path) -> None:
    ordered = np.sort(np.asarray(scores, dtype=float))[::-1]
    _write(path, ["rank", "score"], [(i, repr(float(s))) for i, s in enumerate(ordered)])


def read_centrality_csv(path) -> np.ndarray:
    return np.array([float(s) for _, s in _read(path)])


def write_gcd_csv(rows, path) -> None:
    _write(path, ["graph_a", "graph_b", "distance"], [(a, b, repr(float(d))) for a, b, d in rows])


def read_gcd_csv(path) -> list[tuple[str, str, float]]:
    return [(a, b, float(d)) for a, b, d in _read(path)]
