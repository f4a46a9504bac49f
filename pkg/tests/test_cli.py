import csv
import json
from importlib import resources

import networkx as nx
import pytest

from hrgen.cli import EXIT_ARGS, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, ExperimentConfig, main
from hrgen.experiments import ExtrapolationRow, MirrorStep, ReplicateRow, read_rows
from hrgen.graph import load_edge_list
from hrgen.metrics import read_gcd_csv

KARATE = str(resources.files("hrgen") / "data" / "karate.txt")


def _run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def extracted(tmp_path_factory):
    out = tmp_path_factory.mktemp("extract")
    assert _run("extract", KARATE, "--k", 1, "--s", 34, "--out", out) == EXIT_OK
    return out


def test_extract_outputs(extracted, capsys):
    doc = json.loads((extracted / "grammar.json").read_text())
    assert doc["source"]["n_vertices"] == 34 and doc["rules"]
    summary = json.loads((extracted / "summary.json").read_text())
    assert {"k", "s", "n_vertices", "n_edges"} <= set(summary)
    assert (extracted / "trace.json").exists()


def test_extract_then_exact_is_isomorphic(extracted, tmp_path):
    code = _run("exact", extracted / "grammar.json", extracted / "trace.json", "--out", tmp_path)
    assert code == EXIT_OK
    g = load_edge_list(tmp_path / "exact.txt")
    assert nx.is_isomorphic(g.to_networkx(), load_edge_list(KARATE).to_networkx())


def test_extract_with_sampling_has_no_trace(tmp_path):
    assert _run("extract", KARATE, "--k", 4, "--s", 12, "--out", tmp_path) == EXIT_OK
    assert not (tmp_path / "trace.json").exists()
    assert json.loads((tmp_path / "summary.json").read_text())["k"] == 4


def test_generate_replicates_and_means(extracted, tmp_path):
    code = _run("generate", extracted / "grammar.json", "--replicates", 3, "--seed", 5,
                "--original", KARATE, "--out", tmp_path)
    assert code == EXIT_OK
    files = sorted(tmp_path.glob("replicate_*.txt"))
    assert len(files) == 3 and all(load_edge_list(f).n_vertices == 34 for f in files)
    rows = read_rows(tmp_path / "metrics.csv", ReplicateRow)
    assert [r.replicate for r in rows] == [0, 1, 2] and all(r.gcd >= 0 for r in rows)
    with open(tmp_path / "means.csv") as fh:
        means = list(csv.DictReader(fh))
    assert [m["metric"] for m in means] == ["n_vertices", "n_edges", "gcd", "centrality_distance"]
    assert float(means[0]["mean"]) == 34


def test_generate_deterministic(extracted, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert _run("generate", extracted / "grammar.json", "--replicates", 1, "--seed", 2,
                    "--out", out) == EXIT_OK
    assert (a / "replicate_000.txt").read_text() == (b / "replicate_000.txt").read_text()
    assert (a / "means.csv").read_text() == (b / "means.csv").read_text()


def test_generate_scale_and_size(extracted, tmp_path):
    assert _run("generate", extracted / "grammar.json", "--replicates", 1, "--scale", 2,
                "--out", tmp_path / "x2") == EXIT_OK
    assert load_edge_list(tmp_path / "x2" / "replicate_000.txt").n_vertices == 68
    assert _run("generate", extracted / "grammar.json", "--replicates", 1, "--size", 40,
                "--mode", "approx", "--out", tmp_path / "approx") == EXIT_OK
    n = load_edge_list(tmp_path / "approx" / "replicate_000.txt").n_vertices
    assert abs(n - 40) <= 2


def test_scale_32_target():
    assert ExperimentConfig(scale=32).target(34) == 1088
    assert ExperimentConfig().target(34) == 34


def test_generate_chung_lu(tmp_path):
    code = _run("generate", KARATE, "--generator", "chung-lu", "--replicates", 2,
                "--preset", "karate-poisson", "--scale", 2, "--out", tmp_path)
    assert code == EXIT_OK
    assert load_edge_list(tmp_path / "replicate_000.txt", largest_cc=False).n_vertices <= 68


def test_compare_identical_and_mismatched(tmp_path, extracted):
    assert _run("compare", KARATE, KARATE, "--out", tmp_path) == EXIT_OK
    report = json.loads((tmp_path / "compare.json").read_text())
    assert report["gcd"] == [0.0] and report["centrality_distance"][0] == pytest.approx(0, abs=1e-12)
    small = tmp_path / "small.txt"
    small.write_text("0 1\n1 2\n2 0\n2 3\n")
    out = tmp_path / "mixed"
    assert _run("compare", KARATE, small, "--out", out) == EXIT_OK
    rows = read_gcd_csv(out / "gcd.csv")
    assert len(rows) == 1 and rows[0][2] > 0
    for prefix in ("degree", "hop", "centrality"):
        assert (out / f"{prefix}_small.csv").exists()


def test_compare_replicates_reports_ci(tmp_path, extracted):
    gen = tmp_path / "gen"
    _run("generate", extracted / "grammar.json", "--replicates", 5, "--out", gen)
    reps = sorted(gen.glob("replicate_*.txt"))
    assert _run("compare", KARATE, *reps, "--out", tmp_path / "cmp") == EXIT_OK
    report = json.loads((tmp_path / "cmp" / "compare.json").read_text())
    lo, hi = report["gcd_ci95"]
    assert len(report["gcd"]) == 5 and lo <= report["mean_gcd"] <= hi


def test_infinity_mirror(tmp_path):
    assert _run("infinity-mirror", KARATE, "--recurrences", 3, "--k", 1, "--out", tmp_path) == EXIT_OK
    steps = read_rows(tmp_path / "mirror.csv", MirrorStep)
    assert [s.recurrence for s in steps] == [1, 2, 3]
    assert all(s.n_vertices == 34 and s.n_rules > 0 for s in steps)
    assert _run("infinity-mirror", KARATE, "--recurrences", 0, "--out", tmp_path / "z") == EXIT_OK
    assert read_rows(tmp_path / "z" / "mirror.csv", MirrorStep) == []


def test_extrapolate(tmp_path):
    code = _run("extrapolate", KARATE, "--factors", "1,2", "--replicates", 2, "--k", 1,
                "--out", tmp_path)
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "extrapolate.csv", ExtrapolationRow)
    assert {(r.generator, r.n_target) for r in rows} == {("hrg", 34), ("hrg", 68),
                                                         ("chung-lu", 34), ("chung-lu", 68)}
    assert all(r.status == "ok" and r.replicates == 2 for r in rows)


def test_extrapolate_skips_infeasible(tmp_path, capsys):
    tiny = tmp_path / "tri.txt"
    tiny.write_text("0 1\n1 2\n2 0\n")
    code = _run("extrapolate", tiny, "--factors", "2", "--replicates", 1, "--k", 1,
                "--out", tmp_path)
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "extrapolate.csv", ExtrapolationRow)
    assert next(r for r in rows if r.generator == "hrg").status == "infeasible"
    assert "skipped" in capsys.readouterr().err


def test_config_file(tmp_path, extracted):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"replicates": 2, "seed": 9}))
    assert _run("generate", extracted / "grammar.json", "--config", cfg, "--out", tmp_path) == EXIT_OK
    assert len(list(tmp_path.glob("replicate_*.txt"))) == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert _run("generate", extracted / "grammar.json", "--config", cfg) == EXIT_ARGS
    cfg.write_text("{not json")
    assert _run("generate", extracted / "grammar.json", "--config", cfg) == EXIT_ARGS


@pytest.mark.parametrize("argv", [
    ["extract", KARATE, "--k", "0"],
    ["extract", KARATE, "--replicates", "0"],
    ["generate", KARATE, "--size", "10", "--scale", "2"],
    ["generate", KARATE, "--mode", "bogus"],
    ["nonsense"],
    [],
])
def test_argument_errors(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)] if argv else argv) == EXIT_ARGS


def test_infeasible_exit_code(extracted, tmp_path):
    assert _run("generate", extracted / "grammar.json", "--size", 1, "--out", tmp_path) == EXIT_INFEASIBLE


def test_io_exit_codes(tmp_path):
    assert _run("extract", tmp_path / "missing.txt", "--out", tmp_path) == EXIT_IO
    bad = tmp_path / "bad.txt"
    bad.write_text("a b c\n")
    assert _run("extract", bad, "--out", tmp_path) == EXIT_IO
    assert _run("generate", tmp_path / "nope.json", "--size", 5, "--out", tmp_path) == EXIT_IO


def test_help_exits_zero(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "extract" in capsys.readouterr().out
