import sys
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hrgen.datasets import six_vertex_example, karate  # noqa: E402
from oracles import as_hypergraph, random_connected  # noqa: E402


@pytest.fixture(scope="session")
def karate_graph():
    return karate()


@pytest.fixture(scope="session")
def six():
    return six_vertex_example()


@pytest.fixture(scope="session")
def corpus():
    """Small connected graphs of varied density plus a few named shapes."""
    rng = np.random.default_rng(20240601)
    graphs = [as_hypergraph(random_connected(rng, 3, 20)) for _ in range(40)]
    graphs += [as_hypergraph(G) for G in (nx.path_graph(6), nx.cycle_graph(7), nx.complete_graph(5),
                                          nx.star_graph(6), nx.grid_2d_graph(3, 4),
                                          nx.petersen_graph(), nx.balanced_tree(2, 3))]
    graphs.append(six_vertex_example())
    return graphs


_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one part of a numbered acceptance criterion; summarised at exit."""
    def record(criterion: int, part: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
        print(f"criterion {criterion} [{part}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for c in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[c]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{p}: {'ok' if ok else 'failed'} ({d})" for p, ok, d in parts)
        terminalreporter.write_line(f"criterion {c}: {status} | {detail}")
