"""Major spillover paths, the group-level net-spillover digraph and its
maximum spanning arborescence."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from spillnet.errors import DataError
from spillnet.ingest import MAIN_GROUPS
from spillnet.network import SectorInfluenceMatrix, SpilloverEdge, SpilloverNetwork

DEFAULT_MAJOR_QUANTILE = 0.20


@dataclass(frozen=True)
class MajorPathSet:
    scope: tuple[str, str]
    edges: list[SpilloverEdge]
    cutoff: float
    n_candidates: int

    @property
    def empty(self) -> bool:
        return not self.edges

    @property
    def scope_label(self) -> str:
        m, n = self.scope
        return m if m == n else f"{m}->{n}"


@dataclass(frozen=True)
class GroupDigraph:
    nodes: list[str]
    net: np.ndarray
    gross: np.ndarray

    def edges(self) -> list[tuple[str, str, float]]:
        k = len(self.nodes)
        return [(self.nodes[a], self.nodes[b], float(self.net[a, b]))
                for a in range(k) for b in range(k) if self.net[a, b] > 0]


@dataclass(frozen=True)
class Arborescence:
    root: str | None
    edges: list[tuple[str, str, float]] = field(default_factory=list)

    @property
    def total_weight(self) -> float:
        return math.fsum(w for _, _, w in self.edges)


def major_paths(net: SpilloverNetwork, scope: tuple[str, str],
                quantile: float = DEFAULT_MAJOR_QUANTILE) -> MajorPathSet:
    """Top ``ceil(quantile * count)`` edges by intensity from group ``scope[0]``
    to group ``scope[1]`` (equal tags give the intra-group set).

    Ties are broken by (from, to) so the selection size is exact.
    """
    if not 0 < quantile <= 1:
        raise ValueError("quantile must lie in (0, 1]")
    tags = dict(zip(net.nodes, net.groups()))
    src, dst = scope
    for g in scope:
        if g not in tags.values():
            raise DataError(f"group {g} has no nodes")
    cand = [e for e in net.edges() if tags[e.source] == src and tags[e.target] == dst]
    cand.sort(key=lambda e: (-e.s, e.source, e.target))
    keep = cand[: math.ceil(quantile * len(cand))] if cand else []
    cutoff = keep[-1].s if keep else math.nan
    return MajorPathSet((src, dst), keep, cutoff, len(cand))


def all_major_paths(net: SpilloverNetwork, groups=MAIN_GROUPS,
                    quantile: float = DEFAULT_MAJOR_QUANTILE) -> list[MajorPathSet]:
    return [major_paths(net, (m, n), quantile) for m in groups for n in groups]


def group_net_digraph(si: SectorInfluenceMatrix, groups=MAIN_GROUPS) -> GroupDigraph:
    """net_mn = max(0, gross_mn - gross_nm) for m != n over the main groups."""
    pos = [si.groups.index(g) for g in groups]
    gross = si.gross[np.ix_(pos, pos)]
    net = np.clip(gross - gross.T, 0.0, None)
    np.fill_diagonal(net, 0.0)
    return GroupDigraph(list(groups), net, gross.copy())


def _best_from_root(g: nx.DiGraph, root) -> tuple[float, list] | None:
    h = g.copy()
    h.remove_edges_from(list(h.in_edges(root)))
    if len(nx.descendants(h, root)) != h.number_of_nodes() - 1:
        return None
    tree = nx.maximum_spanning_arborescence(h, attr="weight")
    # read weights back from the input graph, not the solver's working copy
    edges = sorted((u, v, g[u][v]["weight"]) for u, v in tree.edges())
    return math.fsum(w for _, _, w in edges), edges


def _arborescence(nodes, weighted_edges, order) -> Arborescence:
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_weighted_edges_from(weighted_edges)
    if len(nodes) == 1:
        return Arborescence(nodes[0], [])
    best = None
    for root in order:
        found = _best_from_root(g, root)
        if found is None:
            continue
        if best is None or found[0] > best[1]:
            best = (root, found[0], found[1])
    if best is None:
        raise DataError("group digraph not spanning-connected")
    root, _, edges = best
    rank = {v: k for k, v in enumerate(order)}
    edges.sort(key=lambda e: (rank[e[0]], rank[e[1]]))
    return Arborescence(root, [(u, v, float(w)) for u, v, w in edges])


def max_arborescence(g: GroupDigraph) -> Arborescence:
    """Maximum-weight spanning out-tree over positive net edges.

    Every feasible root is tried; the heaviest tree wins and ties go to the
    earlier group in ``g.nodes``.
    """
    return _arborescence(g.nodes, g.edges(), g.nodes)


def node_arborescence(net: SpilloverNetwork) -> Arborescence:
    """Same construction on the node-level net-intensity digraph."""
    s = net.intensity
    d = np.clip(s - s.T, 0.0, None)
    n = len(net.nodes)
    edges = [(net.nodes[i], net.nodes[j], float(d[i, j])) for i in range(n) for j in range(n) if d[i, j] > 0]
    return _arborescence(list(net.nodes), edges, list(net.nodes))


def undirected_mst(g: GroupDigraph) -> list[tuple[str, str, float]]:
    """Maximum spanning tree over |net| with direction dropped, for comparison."""
    u = nx.Graph()
    u.add_nodes_from(g.nodes)
    k = len(g.nodes)
    for a in range(k):
        for b in range(a + 1, k):
            w = abs(g.net[a, b] - g.net[b, a])
            if w > 0:
                u.add_edge(g.nodes[a], g.nodes[b], weight=float(w))
    tree = nx.maximum_spanning_tree(u, weight="weight")
    return sorted((a, b, w) for a, b, w in tree.edges(data="weight"))
