import networkx as nx
import numpy as np
import pytest
from conftest import random_network
from oracles import brute_force_paths, kshell_reference

from spillnet.centrality import shortest_distance, weighted_betweenness, weighted_kshell
from spillnet.network import SpilloverNetwork


def _net(s):
    s = np.asarray(s, dtype=float)
    return SpilloverNetwork.from_intensity([str(k) for k in range(len(s))], s)


def test_ring_single_shell():
    n = 6
    s = np.zeros((n, n))
    for k in range(n):
        s[k, (k + 1) % n] = 1.0
    sh = weighted_kshell(_net(s))
    assert set(sh.shells.values()) == {1}


def test_star_matches_classic_kshell():
    s = np.zeros((6, 6))
    s[0, 1:] = s[1:, 0] = 1.0
    sh = weighted_kshell(_net(s))
    core = nx.core_number(nx.star_graph(5))
    assert all(sh.thresholds[str(k)] == max(1, core[k]) for k in range(6))


def test_kshell_against_reference(rng):
    for _ in range(30):
        s = rng.random((10, 10)) * (rng.random((10, 10)) < 0.4) * 5
        np.fill_diagonal(s, 0)
        expected = kshell_reference(s.tolist())
        got = weighted_kshell(_net(s))
        assert [got[str(k)] for k in range(10)] == [expected[k] for k in range(10)]


def test_kshell_shells_contiguous_and_scale_invariant(rng):
    net = random_network(rng, 12, 0.4)
    sh = weighted_kshell(net)
    assert sorted(set(sh.shells.values())) == list(range(1, sh.max_shell + 1))
    scaled = SpilloverNetwork.from_intensity(net.nodes, net.intensity * 7.3)
    assert weighted_kshell(scaled).shells == sh.shells


def test_kshell_total_strength_option(rng):
    net = random_network(rng, 8, 0.5)
    sh = weighted_kshell(net, strength="total")
    assert set(sh.shells) == set(net.nodes)
    with pytest.raises(ValueError):
        weighted_kshell(net, alpha=0.0)


def test_empty_network():
    net = SpilloverNetwork.from_intensity([], np.zeros((0, 0)))
    assert weighted_kshell(net).shells == {}
    assert weighted_betweenness(net).wbc == {}


def test_distance_examples():
    d, c, _ = shortest_distance(_net([[0, 4.0], [0, 0]]), 0.5)
    assert d[0, 1] == 0.5 and c[0, 1] == 1 and np.isinf(d[1, 0]) and c[1, 0] == 0
    s = np.zeros((3, 3))
    s[0, 2] = 1.0
    s[0, 1] = s[1, 2] = 100.0
    d, c, interior = shortest_distance(_net(s), 0.5)
    assert d[0, 2] == pytest.approx(0.2)
    assert interior[("0", "2")] == frozenset({"1"})


def test_alpha_zero_gives_hop_counts(rng):
    net = random_network(rng, 9, 0.3)
    d, _, _ = shortest_distance(net, 0.0)
    g = nx.DiGraph()
    g.add_nodes_from(range(9))
    g.add_edges_from(zip(*np.nonzero(net.indicator)))
    hops = dict(nx.all_pairs_shortest_path_length(g))
    for a in range(9):
        for b in range(9):
            assert d[a, b] == hops[a].get(b, np.inf)


def test_betweenness_examples():
    s = np.zeros((3, 3))
    s[0, 1] = s[1, 2] = 1.0
    w = weighted_betweenness(_net(s))
    assert (w["0"], w["1"], w["2"]) == (0.0, 1.0, 0.0)
    full = np.ones((5, 5)) - np.eye(5)
    assert all(v == 0 for v in weighted_betweenness(_net(full)).wbc.values())


def test_betweenness_against_enumeration(rng):
    for t in range(40):
        n = int(rng.integers(2, 8))
        s = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
        if t % 4 == 0:
            s = (s > 0).astype(float)  # many ties
        np.fill_diagonal(s, 0)
        d_ref, c_ref, w_ref = brute_force_paths(s, 0.5)
        d, c, _ = shortest_distance(_net(s), 0.5)
        np.testing.assert_allclose(d, d_ref, rtol=1e-12)
        np.testing.assert_array_equal(c, c_ref)
        w = weighted_betweenness(_net(s), 0.5)
        np.testing.assert_allclose([w[str(k)] for k in range(n)], w_ref, atol=1e-9)


def test_betweenness_scale_and_permutation_invariance(rng):
    net = random_network(rng, 9, 0.4)
    w = weighted_betweenness(net).wbc
    scaled = SpilloverNetwork.from_intensity(net.nodes, net.intensity * 3.0)
    assert weighted_betweenness(scaled).wbc == pytest.approx(w)
    perm = rng.permutation(9)
    shuffled = SpilloverNetwork.from_intensity([net.nodes[p] for p in perm], net.intensity[np.ix_(perm, perm)])
    assert weighted_betweenness(shuffled).wbc == pytest.approx(w)
