"""Command-line front end.

Subcommands: extract, generate, exact, compare, infinity-mirror, extrapolate.
Exit codes: 0 success, 2 bad arguments, 3 infeasible generation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .estimators import ChungLu, as_seed_sequence
from .experiments import (ExtrapolationRow, MirrorStep, ReplicateRow, bootstrap_ci,
                          compare_to, extrapolate, infinity_mirror, safe_centrality,
                          write_rows)
from .generate import DerivationError, SizeTable, exact_generate, size_constrained_generate
from .grammar import DerivationTrace, Grammar, GrammarError, extract_grammar, merge_grammars
from .graph import GraphFormatError, SampleSpec, bfs_sample, load_edge_list, write_edge_list
from .metrics import (centrality_cosine_distance, degree_distribution, gcd_from_matrices,
                      graphlet_correlation_matrix, hop_plot, write_centrality_csv,
                      write_degree_csv, write_gcd_csv, write_hop_csv)

EXIT_OK, EXIT_ARGS, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4

# degree-model presets quoted for the extrapolation experiments
PRESETS = {"karate-poisson": ("poisson", 2.43), "protein-geometric": ("geometric", 0.29)}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    inputs: list[str] = field(default_factory=list)
    k: int = 4
    s: int = 500
    size: int | None = None
    scale: float | None = None
    generator: str = "hrg"
    replicates: int = 20
    seed: int = 0
    out: str = "."
    mode: str = "exact"
    recurrences: int = 10
    factors: list[float] = field(default_factory=lambda: [1, 2, 3, 4, 8])
    degree_model: str = "empirical"
    param: float | None = None
    original: str | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("--replicates must be >= 1")
        if self.k < 1 or self.s < 1:
            raise ConfigError("--k and --s must be >= 1")
        if self.size is not None and self.scale is not None:
            raise ConfigError("give at most one of --size and --scale")
        if self.size is not None and self.size < 1:
            raise ConfigError("--size must be >= 1")
        if self.scale is not None and not self.scale > 0:
            raise ConfigError("--scale must be positive")
        if self.recurrences < 0:
            raise ConfigError("--recurrences must be >= 0")
        if self.generator not in ("hrg", "chung-lu"):
            raise ConfigError(f"unknown generator {self.generator!r}")
        if self.mode not in ("exact", "approx"):
            raise ConfigError(f"unknown mode {self.mode!r}")

    def target(self, n: int) -> int:
        if self.size is not None:
            return self.size
        if self.scale is not None:
            return max(1, int(round(self.scale * n)))
        return n


def _out(cfg: ExperimentConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=1) + "\n")


def cmd_extract(cfg: ExperimentConfig) -> dict:
    g = load_edge_list(cfg.inputs[0])
    out = _out(cfg)
    if cfg.k == 1 and cfg.s >= g.n_vertices:
        grammar, trace = extract_grammar(g)
        (out / "trace.json").write_text(trace.to_json())
    else:
        grammar = merge_grammars(extract_grammar(h)[0]
                                 for h in bfs_sample(g, SampleSpec(cfg.k, cfg.s, cfg.seed)))
    doc = json.loads(grammar.to_json())
    doc["source"] = {"path": str(cfg.inputs[0]), "n_vertices": g.n_vertices, "n_edges": g.n_edges}
    _dump(doc, out / "grammar.json")
    summary = grammar.summary() | {"n_vertices": g.n_vertices, "n_edges": g.n_edges,
                                   "k": cfg.k, "s": cfg.s}
    _dump(summary, out / "summary.json")
    print(json.dumps(summary))
    return summary


def _load_grammar(path) -> tuple[Grammar, dict]:
    text = Path(path).read_text()
    return Grammar.from_json(text), json.loads(text).get("source", {})


def _write_replicates(cfg, graphs, original, out: Path) -> list[ReplicateRow]:
    if original is not None:
        oc, ocent = graphlet_correlation_matrix(original), safe_centrality(original)
    rows = []
    for i, g in enumerate(graphs):
        write_edge_list(g, out / f"replicate_{i:03d}.txt")
        d, cd = compare_to(oc, ocent, g) if original is not None else (math.nan, math.nan)
        rows.append(ReplicateRow(i, g.n_vertices, g.n_edges, d, cd))
    write_rows(rows, out / "metrics.csv", ReplicateRow)
    means = []
    for name in ("n_vertices", "n_edges", "gcd", "centrality_distance"):
        vals = [getattr(r, name) for r in rows]
        lo, hi = bootstrap_ci(vals, seed=cfg.seed)
        means.append((name, repr(float(np.mean(vals))), repr(lo), repr(hi)))
    with open(out / "means.csv", "w") as fh:
        fh.write("metric,mean,ci_low,ci_high\n")
        for row in means:
            fh.write(",".join(row) + "\n")
    return rows


def cmd_generate(cfg: ExperimentConfig) -> list[ReplicateRow]:
    out = _out(cfg)
    original = load_edge_list(cfg.original) if cfg.original else None
    seeds = as_seed_sequence(cfg.seed).spawn(cfg.replicates)
    if cfg.generator == "hrg":
        grammar, source = _load_grammar(cfg.inputs[0])
        base = source.get("n_vertices") or (original.n_vertices if original else None)
        if base is None and cfg.size is None:
            raise ConfigError("grammar file has no source size; pass --size or --original")
        n = cfg.target(base)
        table = SizeTable(grammar, n) if cfg.mode == "exact" else None
        graphs = [size_constrained_generate(grammar, n, cfg.mode, seed=sd, table=table)
                  for sd in seeds]
    else:
        g = load_edge_list(cfg.inputs[0])
        original = original or g
        est = ChungLu(cfg.degree_model, cfg.param).fit(g)
        n = cfg.target(g.n_vertices)
        graphs = [est.sample(1, n, random_state=sd)[0] for sd in seeds]
    return _write_replicates(cfg, graphs, original, out)


def cmd_exact(cfg: ExperimentConfig):
    grammar, _ = _load_grammar(cfg.inputs[0])
    trace = DerivationTrace.from_json(Path(cfg.inputs[1]).read_text())
    g = exact_generate(grammar, trace)
    write_edge_list(g, _out(cfg) / "exact.txt")
    print(json.dumps({"n_vertices": g.n_vertices, "n_edges": g.n_edges}))
    return g


def cmd_compare(cfg: ExperimentConfig) -> dict:
    out = _out(cfg)
    graphs = [load_edge_list(p) for p in cfg.inputs]
    names = [Path(p).stem for p in cfg.inputs]
    if len(set(names)) != len(names):
        names = [f"{i}_{n}" for i, n in enumerate(names)]
    corr = [graphlet_correlation_matrix(g) for g in graphs]
    cents = [safe_centrality(g) for g in graphs]
    for name, g, c in zip(names, graphs, cents):
        write_degree_csv(degree_distribution(g), out / f"degree_{name}.csv")
        write_hop_csv(hop_plot(g, seed=cfg.seed), out / f"hop_{name}.csv")
        if c is not None:
            write_centrality_csv(c, out / f"centrality_{name}.csv")
    table = [(names[i], names[j], gcd_from_matrices(corr[i], corr[j]))
             for i in range(len(graphs)) for j in range(i + 1, len(graphs))]
    write_gcd_csv(table, out / "gcd.csv")
    to_orig = [gcd_from_matrices(corr[0], c) for c in corr[1:]]
    cos = [centrality_cosine_distance(cents[0], c) if c is not None and cents[0] is not None
           else math.nan for c in cents[1:]]
    lo, hi = bootstrap_ci(to_orig, seed=cfg.seed)
    report = {"original": names[0], "compared": names[1:], "gcd": to_orig,
              "centrality_distance": cos,
              "mean_gcd": float(np.mean(to_orig)) if to_orig else math.nan,
              "gcd_ci95": [lo, hi]}
    _dump(report, out / "compare.json")
    print(json.dumps({k: report[k] for k in ("mean_gcd", "gcd_ci95")}))
    return report


def cmd_infinity_mirror(cfg: ExperimentConfig):
    g = load_edge_list(cfg.inputs[0])
    s = cfg.s if cfg.k > 1 else None
    report = infinity_mirror(g, cfg.recurrences, cfg.generator, cfg.seed, cfg.k, s, cfg.mode,
                             cfg.degree_model, cfg.param)
    write_rows(report.steps, _out(cfg) / "mirror.csv", MirrorStep)
    for st in report.steps:
        print(f"{st.recurrence}\t{st.gcd:.4f}\t{st.n_vertices}\t{st.n_edges}\t{st.n_rules}")
    if report.error:
        print(f"mirror stopped at {report.error}", file=sys.stderr)
    return report


def cmd_extrapolate(cfg: ExperimentConfig) -> list[ExtrapolationRow]:
    g = load_edge_list(cfg.inputs[0])
    notices: list[str] = []
    s = cfg.s if cfg.k > 1 else None
    factors = [cfg.scale] if cfg.scale is not None else cfg.factors
    rows = extrapolate(g, factors, ("hrg", "chung-lu"), cfg.replicates, cfg.seed, cfg.k, s,
                       cfg.mode, cfg.degree_model, cfg.param, notices)
    write_rows(rows, _out(cfg) / "extrapolate.csv", ExtrapolationRow)
    for note in notices:
        print(note, file=sys.stderr)
    for r in rows:
        print(f"{r.generator}\tx{r.factor:g}\t{r.n_target}\t{r.mean_gcd:.4f}\t"
              f"[{r.ci_low:.4f}, {r.ci_high:.4f}]\t{r.status}")
    return rows


COMMANDS = {"extract": cmd_extract, "generate": cmd_generate, "exact": cmd_exact,
            "compare": cmd_compare, "infinity-mirror": cmd_infinity_mirror,
            "extrapolate": cmd_extrapolate}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults of None mark "not given" so --config values can fill them
    common.add_argument("--k", type=int, help="number of BFS samples (default 4)")
    common.add_argument("--s", type=int, help="vertices per BFS sample (default 500)")
    common.add_argument("--replicates", type=int, help="graphs per setting (default 20)")
    common.add_argument("--size", type=int, help="target vertex count")
    common.add_argument("--scale", type=float, help="target size as a multiple of the input")
    common.add_argument("--mode", choices=["exact", "approx"], help="size control (default exact)")
    common.add_argument("--generator", choices=["hrg", "chung-lu"], help="default hrg")
    common.add_argument("--seed", type=int, help="master random seed (default 0)")
    common.add_argument("--out", help="output directory (default .)")
    common.add_argument("--recurrences", type=int, help="infinity-mirror steps (default 10)")
    common.add_argument("--factors", type=lambda t: [float(x) for x in t.split(",")],
                        help="comma-separated scale factors for extrapolate")
    common.add_argument("--degree-model", dest="degree_model",
                        choices=["empirical", "poisson", "geometric"],
                        help="Chung-Lu degree source (default empirical)")
    common.add_argument("--param", type=float, help="fixed degree-model parameter")
    common.add_argument("--preset", choices=sorted(PRESETS), help="named degree-model setting")
    common.add_argument("--original", help="original graph for generate-time metrics")
    common.add_argument("--config", help="JSON file with any of the above options")

    parser = argparse.ArgumentParser(prog="hrgen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("extract", parents=[common], help="learn a grammar").add_argument("input")
    sub.add_parser("generate", parents=[common],
                   help="sample graphs from a grammar (or an edge list for chung-lu)"
                   ).add_argument("input")
    p = sub.add_parser("exact", parents=[common], help="replay a derivation trace")
    p.add_argument("grammar")
    p.add_argument("trace")
    p = sub.add_parser("compare", parents=[common], help="compare graphs to the first one")
    p.add_argument("original")
    p.add_argument("generated", nargs="+")
    sub.add_parser("infinity-mirror", parents=[common], help="repeated refit-and-generate"
                   ).add_argument("input")
    sub.add_parser("extrapolate", parents=[common], help="GCD across target sizes"
                   ).add_argument("input")
    return parser


def build_config(ns: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if ns.config:
        try:
            values.update(json.loads(Path(ns.config).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config file: {exc}") from None
    if ns.command == "exact":
        values["inputs"] = [ns.grammar, ns.trace]
    elif ns.command == "compare":
        values["inputs"] = [ns.original, *ns.generated]
    else:
        values["inputs"] = [ns.input]
    preset = values.pop("preset", None)
    known = {f.name for f in fields(ExperimentConfig)}
    for name in known | {"preset"}:
        v = getattr(ns, name, None)
        if v is not None and name != "inputs":
            values[name] = v
    preset = values.pop("preset", preset)
    if preset:
        values["degree_model"], values["param"] = PRESETS[preset]
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ARGS
    try:
        cfg = build_config(ns)
        COMMANDS[ns.command](cfg)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (DerivationError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, GraphFormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
