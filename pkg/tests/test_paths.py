import math

import numpy as np
import pytest
from conftest import random_network
from oracles import enumerate_arborescences

from spillnet.errors import DataError
from spillnet.ingest import SectorGrouping
from spillnet.network import SectorInfluenceMatrix, SpilloverNetwork, sector_influence
from spillnet.paths import (
    GroupDigraph,
    group_net_digraph,
    major_paths,
    max_arborescence,
    node_arborescence,
    undirected_mst,
)


def _two_group_net(s):
    codes = [f"n{k}" for k in range(len(s))]
    g = SectorGrouping({c: ("s", "Ke" if k % 2 == 0 else "Cg") for k, c in enumerate(codes)})
    return SpilloverNetwork.from_intensity(codes, np.asarray(s, dtype=float), g)


def test_major_paths_counts(rng):
    s = np.zeros((10, 10))
    ke = [0, 2, 4, 6, 8]
    cg = [1, 3, 5, 7, 9]
    vals = iter(rng.permutation(np.arange(1, 11)) / 10)
    for i in ke[:2]:
        for j in cg:
            s[i, j] = next(vals)
    net = _two_group_net(s)
    got = major_paths(net, ("Ke", "Cg"))
    assert got.n_candidates == 10 and len(got.edges) == 2
    assert sorted(e.s for e in got.edges) == [0.9, 1.0]
    assert got.cutoff == 0.9
    s3 = np.zeros((4, 4))
    s3[0, 1], s3[0, 3], s3[2, 1] = 0.1, 0.2, 0.3
    assert len(major_paths(_two_group_net(s3), ("Ke", "Cg")).edges) == 1


def test_major_paths_ties_and_scaling():
    s = np.zeros((6, 6))
    for i in (0, 2, 4):
        for j in (1, 3, 5):
            s[i, j] = 1.0
    net = _two_group_net(s)
    got = major_paths(net, ("Ke", "Cg"))
    oracle = sorted(net.edges(), key=lambda e: (-e.s, e.source, e.target))[:2]
    assert got.edges == oracle
    scaled = _two_group_net(s * 4.0)
    assert [(e.source, e.target) for e in major_paths(scaled, ("Ke", "Cg")).edges] == \
        [(e.source, e.target) for e in got.edges]
    empty = major_paths(net, ("Cg", "Ke"))
    assert empty.empty and empty.n_candidates == 0


def test_group_net_digraph_worked_values():
    gross = np.zeros((4, 4))
    gross[2, 1], gross[1, 2] = 49.02, 32.80
    si = SectorInfluenceMatrix(["Ke", "Cg", "Kg", "Us"], gross, gross, np.zeros((4, 4), int), np.ones(4))
    g = group_net_digraph(si)
    assert g.net[2, 1] == pytest.approx(16.22)
    assert g.net[1, 2] == 0.0
    sym = SectorInfluenceMatrix(si.groups, np.ones((4, 4)), np.ones((4, 4)), np.zeros((4, 4), int), np.ones(4))
    assert not group_net_digraph(sym).net.any()


def test_group_net_digraph_hand_matrix(rng):
    gross = rng.random((4, 4))
    si = SectorInfluenceMatrix(["Ke", "Cg", "Kg", "Us"], gross, gross, np.zeros((4, 4), int), np.ones(4))
    net = group_net_digraph(si).net
    for a in range(4):
        for b in range(4):
            expect = 0.0 if a == b else max(0.0, gross[a, b] - gross[b, a])
            assert net[a, b] == expect
            assert net[a, b] * net[b, a] == 0


def test_arborescence_examples():
    chain = np.zeros((4, 4))
    chain[0, 1], chain[1, 2], chain[2, 3] = 3, 2, 1
    arb = max_arborescence(GroupDigraph(list("ABCD"), chain, chain))
    assert arb.root == "A" and arb.total_weight == 6
    assert arb.edges == [("A", "B", 3.0), ("B", "C", 2.0), ("C", "D", 1.0)]
    tri = np.zeros((3, 3))
    tri[0, 1], tri[0, 2], tri[1, 2] = 5, 1, 4
    arb = max_arborescence(GroupDigraph(list("ABC"), tri, tri))
    assert {(u, v) for u, v, _ in arb.edges} == {("A", "B"), ("B", "C")} and arb.total_weight == 9


def test_arborescence_not_spanning():
    w = np.zeros((4, 4))
    w[0, 1] = w[2, 3] = 1.0
    with pytest.raises(DataError, match="spanning"):
        max_arborescence(GroupDigraph(list("ABCD"), w, w))


def test_arborescence_against_enumeration(rng):
    for _ in range(50):
        w = rng.random((4, 4)) * (rng.random((4, 4)) < 0.7)
        np.fill_diagonal(w, 0)
        best = enumerate_arborescences(list("ABCD"), w)
        g = GroupDigraph(list("ABCD"), w, w)
        if best == -math.inf:
            with pytest.raises(DataError):
                max_arborescence(g)
            continue
        arb = max_arborescence(g)
        assert arb.total_weight == best
        assert len(arb.edges) == 3
        assert sorted(v for _, v, _ in arb.edges) == sorted(set("ABCD") - {arb.root})


def test_options_run(rng):
    net = random_network(rng, 8, 0.9)
    g = group_net_digraph(sector_influence(net))
    tree = undirected_mst(g)
    assert len(tree) <= 3
    arb = node_arborescence(net)
    assert len(arb.edges) == 7
