"""Experiment protocols: replicate generation, size extrapolation and the
infinity mirror, each returning a plain report object."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .estimators import HRG, ChungLu, as_seed_sequence, check_graph
from .generate import DerivationError
from .graph import Hypergraph, largest_component
from .metrics import (ConvergenceError, centrality_cosine_distance, eigenvector_centrality,
                      gcd_from_matrices, graphlet_correlation_matrix)


def bootstrap_ci(values, n_resamples: int = 1000, level: float = 0.95, seed=0) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean."""
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        return (math.nan, math.nan)
    rng = np.random.default_rng(seed)
    means = x[rng.integers(0, len(x), size=(n_resamples, len(x)))].mean(axis=1)
    alpha = (1 - level) / 2
    return float(np.quantile(means, alpha)), float(np.quantile(means, 1 - alpha))


def make_generator(name: str, k: int = 4, s: int = 500, mode: str = "exact",
                   random_state=None, degree_model: str = "empirical", param=None):
    if name == "hrg":
        return HRG(k=k, s=s, mode=mode, random_state=random_state)
    if name == "chung-lu":
        return ChungLu(family=degree_model, param=param, random_state=random_state)
    raise ValueError(f"unknown generator {name!r}")


def safe_centrality(g: Hypergraph):
    try:
        return eigenvector_centrality(g, max_iter=20000)
    except ConvergenceError:
        return None


@dataclass
class ReplicateRow:
    replicate: int
    n_vertices: int
    n_edges: int
    gcd: float
    centrality_distance: float


@dataclass
class ReplicateReport:
    generator: str
    n_target: int
    rows: list[ReplicateRow] = field(default_factory=list)
    failures: int = 0

    @property
    def gcds(self) -> list[float]:
        return [r.gcd for r in self.rows]

    @property
    def mean_gcd(self) -> float:
        return float(np.mean(self.gcds)) if self.rows else math.nan

    def ci(self) -> tuple[float, float]:
        return bootstrap_ci(self.gcds)


def compare_to(original_corr, original_cent, g: Hypergraph) -> tuple[float, float]:
    d = gcd_from_matrices(original_corr, graphlet_correlation_matrix(g))
    cent = safe_centrality(g)
    cd = (centrality_cosine_distance(original_cent, cent)
          if cent is not None and original_cent is not None else math.nan)
    return d, cd


def replicate(original: Hypergraph, generator: str = "hrg", n_target: int | None = None,
              replicates: int = 20, seed=0, k: int = 1, s: int | None = None,
              mode: str = "exact", degree_model: str = "empirical", param=None,
              graphs_out: list | None = None) -> ReplicateReport:
    """Fit ``generator`` to ``original`` and compare ``replicates`` samples to it."""
    original = check_graph(original, largest_cc=True)
    s = original.n_vertices if s is None else s
    n_target = original.n_vertices if n_target is None else n_target
    fit_seed, sample_seed = as_seed_sequence(seed).spawn(2)
    est = make_generator(generator, k, s, mode, fit_seed, degree_model, param).fit(original)
    graphs = est.sample(replicates, n_vertices=n_target, random_state=sample_seed)
    report = ReplicateReport(generator, n_target)
    oc, ocent = graphlet_correlation_matrix(original), safe_centrality(original)
    for i, g in enumerate(graphs):
        d, cd = compare_to(oc, ocent, g)
        report.rows.append(ReplicateRow(i, g.n_vertices, g.n_edges, d, cd))
        if graphs_out is not None:
            graphs_out.append(g)
    return report


@dataclass
class ExtrapolationRow:
    generator: str
    factor: float
    n_target: int
    mean_gcd: float
    ci_low: float
    ci_high: float
    replicates: int
    status: str = "ok"


def extrapolate(original: Hypergraph, factors=(1, 2, 4, 8), generators=("hrg", "chung-lu"),
                replicates: int = 20, seed=0, k: int = 1, s: int | None = None,
                mode: str = "exact", degree_model: str = "empirical", param=None,
                notices: list | None = None) -> list[ExtrapolationRow]:
    """GCD to the original for replicate graphs at ``factor * n`` vertices.

    Infeasible targets are skipped and reported with status ``infeasible``.
    """
    original = check_graph(original, largest_cc=True)
    rows = []
    seeds = as_seed_sequence(seed).spawn(len(generators) * len(factors))
    it = iter(seeds)
    for gen in generators:
        for f in factors:
            n_target = max(1, int(round(f * original.n_vertices)))
            try:
                rep = replicate(original, gen, n_target, replicates, next(it), k, s, mode,
                                degree_model, param)
            except DerivationError as exc:
                if notices is not None:
                    notices.append(f"{gen} x{f}: skipped ({exc})")
                rows.append(ExtrapolationRow(gen, float(f), n_target, math.nan, math.nan,
                                             math.nan, 0, "infeasible"))
                continue
            lo, hi = rep.ci()
            rows.append(ExtrapolationRow(gen, float(f), n_target, rep.mean_gcd, lo, hi,
                                         len(rep.rows)))
    return rows


@dataclass
class MirrorStep:
    recurrence: int
    gcd: float
    n_vertices: int
    n_edges: int
    n_rules: int


@dataclass
class MirrorReport:
    generator: str
    steps: list[MirrorStep] = field(default_factory=list)
    error: str | None = None
    failed_at: int | None = None

    @property
    def gcds(self) -> list[float]:
        return [s.gcd for s in self.steps]


def infinity_mirror(original: Hypergraph, recurrences: int = 10, generator: str = "hrg",
                    seed=0, k: int = 1, s: int | None = None, mode: str = "exact",
                    degree_model: str = "empirical", param=None) -> MirrorReport:
    """Refit on the previous output and generate at the original size, ``recurrences`` times.

    HRG is refit on the largest component of the previous output. A failure
    ends the chain; the partial report records where.
    """
    original = check_graph(original, largest_cc=True)
    n = original.n_vertices
    oc = graphlet_correlation_matrix(original)
    report = MirrorReport(generator)
    current = original
    for i, sd in enumerate(as_seed_sequence(seed).spawn(recurrences), start=1):
        try:
            fit_on = largest_component(current).relabeled() if generator == "hrg" else current
            s_i = fit_on.n_vertices if s is None else s
            est = make_generator(generator, k, s_i, mode, sd, degree_model, param).fit(fit_on)
            current = est.sample(1, n_vertices=n, random_state=sd.spawn(1)[0])[0]
        except (DerivationError, ValueError) as exc:
            report.error = f"recurrence {i}: {exc}"
            report.failed_at = i
            break
        n_rules = len(est.grammar_) if generator == "hrg" else 0
        d = gcd_from_matrices(oc, graphlet_correlation_matrix(current))
        report.steps.append(MirrorStep(i, d, current.n_vertices, current.n_edges, n_rules))
    return report


# --- CSV round trips ---------------------------------------------------------

def write_rows(rows, path, cls) -> None:
    names = list(cls.__dataclass_fields__)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(r).values()])


def read_rows(path, cls) -> list:
    types = {name: f.type for name, f in cls.__dataclass_fields__.items()}
    conv = {"int": int, "float": float, "str": str}
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(cls(**{k: conv[types[k]](v) for k, v in rec.items()}))
    return out
