"""Estimator-style wrappers around grammar learning, Chung-Lu and graphlet
correlation, following scikit-learn's fit/sample/transform conventions."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .baselines import (DegreeModel, DegreeSequence, chung_lu_generate, fit_degree_model,
                        sample_degree_sequence)
from .generate import (SizeTable, exact_generate, size_constrained_generate,
                       stochastic_generate)
from .graph import Hypergraph, SampleSpec, bfs_sample, largest_component
from .grammar import extract_grammar, merge_grammars
from .metrics import graphlet_correlation_matrix


def check_graph(X, largest_cc: bool = False, require_connected: bool = False) -> Hypergraph:
    """Coerce ``X`` to a simple :class:`Hypergraph` with vertices ``0..n-1``.

    Accepts a Hypergraph, a networkx graph, or an ``(m, 2)`` integer array of
    edge pairs. Self-loops and duplicate edges are dropped.
    """
    if isinstance(X, Hypergraph):
        if not X.is_simple():
            raise ValueError("graph holds nonterminal edges")
        g = X
    elif hasattr(X, "edges") and hasattr(X, "nodes"):
        nodes = list(X.nodes)
        index = {v: i for i, v in enumerate(nodes)}
        g = Hypergraph.from_edges(((index[u], index[v]) for u, v in X.edges()),
                                  vertices=range(len(nodes)), labels=tuple(nodes))
    else:
        arr = np.asarray(X)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"expected an (m, 2) array of edges, got shape {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("edge array must hold integer vertex ids")
        g = Hypergraph.from_edges(arr.tolist())
    if g.n_vertices == 0:
        raise ValueError("graph has no vertices")
    if g.vertices != tuple(range(g.n_vertices)):
        g = g.relabeled()
    if not g.is_connected():
        if require_connected:
            raise ValueError(f"graph has {len(g.components())} components")
        if largest_cc:
            g = largest_component(g).relabeled()
    return g


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _seeds(random_state, n: int) -> list[np.random.SeedSequence]:
    return as_seed_sequence(random_state).spawn(n)


class HRG(BaseEstimator):
    """Hyperedge replacement grammar learned from a graph's clique tree.

    Parameters
    ----------
    k, s : int
        Number of BFS samples and vertices per sample. With ``k=1`` and
        ``s >= n`` the whole graph is used and ``trace_`` allows exact
        regeneration.
    mode : {"exact", "approx", "free"}
        How :meth:`sample` controls size: conditioned on the exact vertex count,
        steered to within 5%, or unconstrained.
    random_state : int, SeedSequence or None
    """

    def __init__(self, k: int = 4, s: int = 500, mode: str = "exact", random_state=None):
        self.k = k
        self.s = s
        self.mode = mode
        self.random_state = random_state

    def fit(self, X, y=None):
        if self.mode not in ("exact", "approx", "free"):
            raise ValueError(f"mode must be exact, approx or free, got {self.mode!r}")
        g = check_graph(X, largest_cc=True)
        spec = SampleSpec(self.k, self.s, self._seed_int())
        if self.k == 1 and self.s >= g.n_vertices:
            self.grammar_, self.trace_ = extract_grammar(g)
        else:
            self.grammar_ = merge_grammars(extract_grammar(h)[0] for h in bfs_sample(g, spec))
            self.trace_ = None
        self.n_vertices_ = g.n_vertices
        self.n_edges_ = g.n_edges
        self._table = None
        return self

    def _seed_int(self):
        rs = self.random_state
        if rs is None:
            return None
        return int(as_seed_sequence(rs).generate_state(1)[0])

    def _size_table(self, n: int) -> SizeTable:
        if self._table is None or self._table.n_max < n:
            self._table = SizeTable(self.grammar_, n)
        return self._table

    def sample(self, n_samples: int = 1, n_vertices: int | None = None,
               random_state=None) -> list[Hypergraph]:
        """Draw ``n_samples`` graphs; ``n_vertices`` defaults to the training size."""
        check_is_fitted(self, "grammar_")
        n = self.n_vertices_ if n_vertices is None else int(n_vertices)
        seeds = _seeds(self.random_state if random_state is None else random_state, n_samples)
        out = []
        for seed in seeds:
            if self.mode == "free":
                out.append(stochastic_generate(self.grammar_, seed=seed))
            elif self.mode == "exact":
                out.append(size_constrained_generate(self.grammar_, n, "exact", seed=seed,
                                                     table=self._size_table(n)))
            else:
                out.append(size_constrained_generate(self.grammar_, n, "approx", seed=seed))
        return out

    def regenerate(self) -> Hypergraph:
        """Replay the training derivation; isomorphic to the training graph."""
        check_is_fitted(self, "grammar_")
        if self.trace_ is None:
            raise NotFittedError("exact regeneration needs k=1 and s >= n at fit time")
        return exact_generate(self.grammar_, self.trace_)


class ChungLu(BaseEstimator):
    """Chung-Lu baseline.

    ``family="empirical"`` keeps the observed degrees (used as-is at the
    training size, resampled otherwise); ``poisson`` and ``geometric`` fit a
    model, or use ``param`` verbatim when it is given.
    """

    def __init__(self, family: str = "empirical", param: float | None = None, random_state=None):
        self.family = family
        self.param = param
        self.random_state = random_state

    def fit(self, X, y=None):
        g = check_graph(X)
        self.degree_sequence_ = DegreeSequence.from_graph(g)
        if self.family == "empirical":
            self.model_ = DegreeModel("empirical", values=tuple(int(d) for d in g.degrees()))
        elif self.param is not None:
            self.model_ = DegreeModel(self.family, float(self.param))
        else:
            self.model_ = fit_degree_model(g, self.family)
        self.n_vertices_ = g.n_vertices
        return self

    def sample(self, n_samples: int = 1, n_vertices: int | None = None,
               random_state=None) -> list[Hypergraph]:
        check_is_fitted(self, "model_")
        n = self.n_vertices_ if n_vertices is None else int(n_vertices)
        out = []
        for seed in _seeds(self.random_state if random_state is None else random_state, n_samples):
            deg_seed, edge_seed = seed.spawn(2)
            if self.family == "empirical" and n == self.n_vertices_:
                seq = self.degree_sequence_
            else:
                seq = sample_degree_sequence(self.model_, n, seed=deg_seed)
            out.append(chung_lu_generate(seq, seed=edge_seed))
        return out


class GraphletCorrelation(TransformerMixin, BaseEstimator):
    """Maps each graph to the upper triangle of its orbit correlation matrix.

    Euclidean distance between two output rows is the GCD.
    """

    def fit(self, X, y=None):
        self.n_features_ = 55
        return self

    def transform(self, X):
        rows = []
        for g in X:
            corr = graphlet_correlation_matrix(check_graph(g))
            rows.append(corr[np.triu_indices(corr.shape[0], k=1)])
        return np.array(rows)
