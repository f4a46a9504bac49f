import networkx as nx
import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hrgen.estimators import HRG, ChungLu, GraphletCorrelation, as_seed_sequence, check_graph
from hrgen.graph import Hypergraph
from hrgen.metrics import gcd


def _iso(a, b):
    return nx.is_isomorphic(a.to_networkx(), b.to_networkx())


def test_check_graph_inputs(karate_graph):
    G = nx.karate_club_graph()
    from_nx = check_graph(G)
    from_arr = check_graph(np.array(list(G.edges())))
    assert from_nx == from_arr and _iso(from_nx, karate_graph)
    assert check_graph(karate_graph) is karate_graph
    shifted = check_graph(np.array([[10, 20], [20, 30]]))
    assert shifted.vertices == (0, 1, 2)


def test_check_graph_rejects():
    with pytest.raises(ValueError):
        check_graph(np.zeros((3, 3), dtype=int))
    with pytest.raises(ValueError):
        check_graph(np.array([[0.5, 1.0]]))
    with pytest.raises(ValueError):
        check_graph(np.array([[0, 1], [2, 3]]), require_connected=True)
    assert check_graph(np.array([[0, 1], [1, 2], [5, 6]]), largest_cc=True).n_vertices == 3
    with pytest.raises(ValueError):
        check_graph(Hypergraph.from_edges([]))


def test_params_and_clone():
    est = HRG(k=2, s=20, mode="approx", random_state=3)
    assert est.get_params() == {"k": 2, "s": 20, "mode": "approx", "random_state": 3}
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    assert ChungLu(family="poisson", param=2.43).get_params()["param"] == 2.43


def test_unfitted():
    with pytest.raises(NotFittedError):
        HRG().sample()
    with pytest.raises(NotFittedError):
        ChungLu().sample()


def test_bad_mode(karate_graph):
    with pytest.raises(ValueError):
        HRG(mode="bogus").fit(karate_graph)


def test_regenerate_whole_graph(karate_graph):
    est = HRG(k=1, s=10_000).fit(karate_graph)
    assert _iso(est.regenerate(), karate_graph)
    with pytest.raises(NotFittedError):
        HRG(k=2, s=20, random_state=0).fit(karate_graph).regenerate()


def test_hrg_sample_sizes(karate_graph):
    est = HRG(k=4, s=20, random_state=0).fit(karate_graph)
    graphs = est.sample(3)
    assert len(graphs) == 3 and all(g.n_vertices == 34 for g in graphs)
    assert all(g.n_vertices == 50 for g in est.sample(2, n_vertices=50))
    approx = HRG(k=4, s=20, mode="approx", random_state=0).fit(karate_graph).sample(2, n_vertices=100)
    assert all(abs(g.n_vertices - 100) <= 5 for g in approx)
    free = HRG(k=1, s=34, mode="free", random_state=0).fit(karate_graph).sample(5)
    assert len(free) == 5


def test_hrg_deterministic(karate_graph):
    a = HRG(random_state=7, s=20).fit(karate_graph)
    b = HRG(random_state=7, s=20).fit(karate_graph)
    assert a.grammar_ == b.grammar_
    assert a.sample(2) == b.sample(2)
    assert a.sample(1, random_state=1) == b.sample(1, random_state=np.random.SeedSequence(1))


def test_chung_lu_estimator(karate_graph):
    est = ChungLu(random_state=0).fit(karate_graph)
    g = est.sample(1)[0]
    assert g.n_vertices == 34
    assert est.sample(1, n_vertices=68)[0].n_vertices == 68
    pois = ChungLu(family="poisson", param=2.43, random_state=0).fit(karate_graph)
    assert pois.model_.param == 2.43
    geo = ChungLu(family="geometric", random_state=0).fit(karate_graph)
    assert geo.model_.param == pytest.approx(1 / (1 + 156 / 34))


def test_graphlet_correlation_transform(karate_graph):
    er = Hypergraph.from_edges(nx.gnm_random_graph(34, 78, seed=0).edges(), vertices=range(34))
    X = GraphletCorrelation().fit_transform([karate_graph, er])
    assert X.shape == (2, 55)
    assert np.linalg.norm(X[0] - X[1]) == pytest.approx(gcd(karate_graph, er).distance)


def test_seed_sequence_passthrough():
    ss = np.random.SeedSequence(4)
    assert as_seed_sequence(ss) is ss
    assert as_seed_sequence(4).entropy == 4
