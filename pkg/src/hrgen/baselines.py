"""Chung-Lu random graphs and simple degree-distribution fits."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .graph import Hypergraph

# above this size the pairwise generator is replaced by the skipping one
PAIRWISE_LIMIT = 20_000


@dataclass
class DegreeSequence:
    """Expected degrees ``w``. Pairs with ``w_i * w_j > W`` get probability 1;
    ``clamped`` lists the vertices for which that can happen (``w_i**2 > W``)."""

    weights: np.ndarray
    clamped: list[int] = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise ValueError("degree sequence must be a nonempty 1-d sequence")
        if (w < 0).any() or not np.isfinite(w).all():
            raise ValueError("expected degrees must be finite and nonnegative")
        if w.sum() <= 0:
            raise ValueError("total weight must be positive")
        self.weights = w
        self.clamped = [int(i) for i in np.flatnonzero(w * w > w.sum())]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return len(self.weights)

    @classmethod
    def from_graph(cls, g: Hypergraph) -> "DegreeSequence":
        return cls(g.degrees())


def _pairwise(w: np.ndarray, W: float, rng) -> list[tuple[int, int]]:
    edges = []
    for i in range(len(w) - 1):
        p = np.minimum(1.0, w[i] * w[i + 1:] / W)
        hit = np.flatnonzero(rng.random(len(p)) < p)
        edges.extend((i, i + 1 + int(j)) for j in hit)
    return edges


def _skipping(w: np.ndarray, W: float, rng) -> list[tuple[int, int]]:
    # geometric skips over pairs sorted by decreasing weight (Miller & Hagberg)
    order = np.argsort(-w, kind="stable")
    ws = w[order]
    n = len(ws)
    edges = []
    for u in range(n - 1):
        v = u + 1
        p = min(ws[u] * ws[v] / W, 1.0)
        while v < n and p > 0:
            if p != 1.0:
                v += int(math.floor(math.log(rng.random()) / math.log1p(-p)))
            if v < n:
                q = min(ws[u] * ws[v] / W, 1.0)
                if rng.random() < q / p:
                    edges.append((int(order[u]), int(order[v])))
                p = q
                v += 1
    return edges


def chung_lu_generate(seq: DegreeSequence, seed=None, method: str = "auto") -> Hypergraph:
    """Join each pair ``i < j`` independently with probability ``min(1, w_i w_j / W)``.

    ``method`` is ``"pairwise"`` (every pair drawn), ``"skip"`` (expected time
    linear in n + m) or ``"auto"`` (pairwise up to 20,000 vertices).
    """
    rng = np.random.default_rng(seed)
    if method == "auto":
        method = "pairwise" if len(seq) <= PAIRWISE_LIMIT else "skip"
    if method == "pairwise":
        edges = _pairwise(seq.weights, seq.total, rng)
    elif method == "skip":
        edges = _skipping(seq.weights, seq.total, rng)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Hypergraph.from_edges(edges, vertices=range(len(seq)))


@dataclass(frozen=True)
class DegreeModel:
    """``poisson`` (param = lambda), ``geometric`` on {0, 1, ...} (param = p) or
    ``empirical`` (``values`` resampled uniformly)."""

    family: str
    param: float = float("nan")
    values: tuple[int, ...] = ()

    def __post_init__(self):
        if self.family == "poisson" and not self.param >= 0:
            raise ValueError("poisson lambda must be >= 0")
        elif self.family == "geometric" and not 0 < self.param <= 1:
            raise ValueError("geometric p must be in (0, 1]")
        elif self.family == "empirical" and not self.values:
            raise ValueError("empirical model needs values")
        elif self.family not in ("poisson", "geometric", "empirical"):
            raise ValueError(f"unknown degree model family {self.family!r}")

    @property
    def mean(self) -> float:
        if self.family == "poisson":
            return self.param
        if self.family == "geometric":
            return (1 - self.param) / self.param
        return float(np.mean(self.values))

    def draw(self, size: int, rng) -> np.ndarray:
        if self.family == "poisson":
            return rng.poisson(self.param, size)
        if self.family == "geometric":
            return rng.geometric(self.param, size) - 1
        return rng.choice(np.asarray(self.values), size)


def fit_degree_model(g: Hypergraph, family: str = "poisson") -> DegreeModel:
    """Maximum-likelihood fit to the degree sequence: Poisson ``lambda = mean``,
    geometric ``p = 1 / (1 + mean)``."""
    if g.n_vertices == 0:
        raise ValueError("cannot fit a degree model to an empty graph")
    mean = 2.0 * g.n_edges / g.n_vertices
    if family == "poisson":
        return DegreeModel("poisson", mean)
    if family == "geometric":
        return DegreeModel("geometric", 1.0 / (1.0 + mean))
    raise ValueError(f"unknown family {family!r}")


def sample_degree_sequence(model: DegreeModel, n_target: int, seed=None,
                           resample_zeros: bool = True, max_rounds: int = 1000) -> DegreeSequence:
    """``n_target`` i.i.d. degree draws; zeros are redrawn when ``resample_zeros``."""
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    rng = np.random.default_rng(seed)
    out = model.draw(n_target, rng)
    if resample_zeros:
        for _ in range(max_rounds):
            zeros = np.flatnonzero(out == 0)
            if len(zeros) == 0:
                break
            out[zeros] = model.draw(len(zeros), rng)
        else:
            raise ValueError("model almost surely draws zero; cannot avoid zero degrees")
    return DegreeSequence(out)


def write_degree_sequence(seq: DegreeSequence, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        for w in seq.weights:
            fh.write(f"{int(round(w))}\n")


def read_degree_sequence(path: str | os.PathLike) -> DegreeSequence:
    with open(path) as fh:
        return DegreeSequence([int(line) for line in fh if line.strip()])
