"""Weighted directed spillover network and its node/group indicators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from spillnet.bekk.model import IDX
from spillnet.errors import DataError
from spillnet.ingest import MAIN_GROUPS, PeriodSpec, SectorGrouping

ZERO_WEIGHT = 1e-12


@dataclass(frozen=True)
class SpilloverEdge:
    source: str
    target: str
    e: int
    w: float
    s: float


@dataclass
class SpilloverNetwork:
    """Edge indicator, weight and intensity matrices over ordered nodes.

    ``indicator[i, j] == 1`` marks a spillover from ``nodes[i]`` to ``nodes[j]``;
    ``intensity = indicator * weight``.
    """

    nodes: list[str]
    indicator: np.ndarray
    weight: np.ndarray
    grouping: SectorGrouping | None = None
    period: PeriodSpec | None = None
    n_nonconverged: int = 0
    n_pairs: int = 0

    def __post_init__(self):
        n = len(self.nodes)
        self.indicator = np.asarray(self.indicator, dtype=np.int8).reshape(n, n)
        self.weight = np.asarray(self.weight, dtype=float).reshape(n, n)
        if np.any(np.diag(self.indicator)):
            raise DataError("self-edges are not allowed")
        if np.any(self.weight < 0):
            raise DataError("edge weights must be non-negative")
        # zero-weight edges carry no spillover
        self.indicator = np.where(self.weight > ZERO_WEIGHT, self.indicator, 0).astype(np.int8)
        self._index = {c: k for k, c in enumerate(self.nodes)}

    @property
    def intensity(self) -> np.ndarray:
        return self.indicator * self.weight

    def index(self, code: str) -> int:
        return self._index[code]

    @classmethod
    def from_intensity(cls, nodes, intensity, grouping=None, period=None) -> SpilloverNetwork:
        s = np.asarray(intensity, dtype=float)
        return cls(list(nodes), (s > 0).astype(np.int8), s, grouping, period)

    def edges(self, only_active: bool = True) -> list[SpilloverEdge]:
        out = []
        n = len(self.nodes)
        s = self.intensity
        for i in range(n):
            for j in range(n):
                if i == j or (only_active and not self.indicator[i, j]):
                    continue
                out.append(SpilloverEdge(self.nodes[i], self.nodes[j], int(self.indicator[i, j]),
                                         float(self.weight[i, j]), float(s[i, j])))
        return out

    def without_edge(self, source: str, target: str) -> SpilloverNetwork:
        ind = self.indicator.copy()
        ind[self.index(source), self.index(target)] = 0
        return SpilloverNetwork(list(self.nodes), ind, self.weight.copy(), self.grouping, self.period)

    def groups(self) -> list[str]:
        if self.grouping is None:
            raise DataError("network has no sector grouping")
        return [self.grouping.group_of(c) for c in self.nodes]


@dataclass(frozen=True)
class NodeIndicators:
    code: str
    out_strength: float
    in_strength: float
    ri: float


@dataclass(frozen=True)
class GroupSummary:
    """Per-group distribution of node indicators and aggregate ratios."""

    group: str
    codes: list[str]
    toto: dict
    tifo: dict
    sum_toto: float
    sum_out: float
    sum_tifo: float
    sum_in: float

    @property
    def toto_ratio(self) -> float:
        return 100.0 * self.sum_toto / self.sum_out if self.sum_out > 0 else 0.0

    @property
    def tifo_ratio(self) -> float:
        return 100.0 * self.sum_tifo / self.sum_in if self.sum_in > 0 else 0.0


@dataclass(frozen=True)
class GroupIndicators:
    toto: dict  # code -> TOTO, every node
    tifo: dict
    summaries: list[GroupSummary] = field(default_factory=list)

    def summary(self, group: str) -> GroupSummary:
        for s in self.summaries:
            if s.group == group:
                return s
        raise KeyError(group)


@dataclass(frozen=True)
class SectorInfluenceMatrix:
    groups: list[str]
    si: np.ndarray
    gross: np.ndarray
    path_counts: np.ndarray
    sizes: np.ndarray


# ---------------------------------------------------------------------------


def build_network(fits, nodes, grouping: SectorGrouping | None = None, level: float = 0.10,
                  period: PeriodSpec | None = None) -> SpilloverNetwork:
    """Assemble e_ij, w_ij = |a_ij| + |b_ij| from pairwise fits.

    Direction i -> j exists when both the joint test and the i -> j test
    reject at ``level``. Non-converged pairs contribute no edges.
    """
    nodes = list(nodes)
    if grouping is not None:
        grouping.check_covers(nodes)
    pos = {c: k for k, c in enumerate(nodes)}
    n = len(nodes)
    ind = np.zeros((n, n), dtype=np.int8)
    w = np.zeros((n, n))
    seen = set()
    nonconv = 0
    for fit in fits:
        ci, cj = fit.pair
        key = frozenset((ci, cj))
        if ci == cj:
            raise DataError(f"fit pairs {ci} with itself")
        if key in seen:
            raise DataError(f"duplicate fit for pair ({ci}, {cj})")
        seen.add(key)
        i, j = pos[ci], pos[cj]
        theta = fit.theta
        w[i, j] = abs(theta[IDX["a_ij"]]) + abs(theta[IDX["b_ij"]])
        w[j, i] = abs(theta[IDX["a_ji"]]) + abs(theta[IDX["b_ji"]])
        if not fit.converged or fit.tests is None:
            nonconv += 1
            continue
        joint = fit.tests.joint.p_value < level
        ind[i, j] = int(joint and fit.tests.dir_ij.p_value < level)
        ind[j, i] = int(joint and fit.tests.dir_ji.p_value < level)
    return SpilloverNetwork(nodes, ind, w, grouping, period, n_nonconverged=nonconv, n_pairs=len(seen))


def node_connectivity(net: SpilloverNetwork) -> list[NodeIndicators]:
    """O_i, I_i and ri_i = (O_i - I_i) / (O_i + I_i) (0 for isolated nodes)."""
    s = net.intensity
    out = []
    for k, code in enumerate(net.nodes):
        o = math.fsum(s[k, :])
        i = math.fsum(s[:, k])
        ri = (o - i) / (o + i) if o + i > 0 else 0.0
        out.append(NodeIndicators(code, o, i, ri))
    return out


def group_connectivity(net: SpilloverNetwork, groups=MAIN_GROUPS) -> GroupIndicators:
    """TOTO/TIFO per node (strength to/from nodes outside its own group).

    Ungrouped nodes are their own singleton group and are left out of the
    per-group summaries.
    """
    tags = net.groups()
    s = net.intensity
    n = len(net.nodes)
    toto, tifo = {}, {}
    for k, code in enumerate(net.nodes):
        if tags[k] == "Ungrouped":
            other = [j for j in range(n) if j != k]
        else:
            other = [j for j in range(n) if tags[j] != tags[k]]
        toto[code] = math.fsum(s[k, other])
        tifo[code] = math.fsum(s[other, k])
    nodes = {n.code: n for n in node_connectivity(net)}
    summaries = []
    for g in groups:
        members = [c for c, t in zip(net.nodes, tags) if t == g]
        summaries.append(GroupSummary(
            group=g,
            codes=members,
            toto={c: toto[c] for c in members},
            tifo={c: tifo[c] for c in members},
            sum_toto=math.fsum(toto[c] for c in members),
            sum_out=math.fsum(nodes[c].out_strength for c in members),
            sum_tifo=math.fsum(tifo[c] for c in members),
            sum_in=math.fsum(nodes[c].in_strength for c in members),
        ))
    return GroupIndicators(toto, tifo, summaries)


def sector_influence(net: SpilloverNetwork, groups=MAIN_GROUPS, include_ungrouped: bool = False) -> SectorInfluenceMatrix:
    """SI_mn = gross_mn / (N_m N_n), diagonal cells included."""
    tags = net.groups()
    order = list(groups)
    if include_ungrouped and "Ungrouped" in tags and "Ungrouped" not in order:
        order.append("Ungrouped")
    members = {g: [k for k, t in enumerate(tags) if t == g] for g in order}
    for g in groups:
        if not members[g]:
            raise DataError(f"group {g} has no nodes")
    s = net.intensity
    ind = net.indicator
    m = len(order)
    gross = np.zeros((m, m))
    counts = np.zeros((m, m), dtype=int)
    si = np.zeros((m, m))
    sizes = np.array([len(members[g]) for g in order])
    for a, ga in enumerate(order):
        for b, gb in enumerate(order):
            block = s[np.ix_(members[ga], members[gb])]
            gross[a, b] = math.fsum(block.ravel())
            counts[a, b] = int(ind[np.ix_(members[ga], members[gb])].sum())
            if sizes[a] and sizes[b]:
                si[a, b] = gross[a, b] / (sizes[a] * sizes[b])
    return SectorInfluenceMatrix(order, si, gross, counts, sizes)


def network_totals(net: SpilloverNetwork) -> tuple[float, int]:
    return math.fsum(net.intensity.ravel()), int(net.indicator.sum())


def group_totals(sim: SectorInfluenceMatrix) -> dict:
    """Table totals with and without the intra-group diagonal."""
    diag_i = math.fsum(np.diag(sim.gross))
    diag_c = int(np.trace(sim.path_counts))
    tot_i = math.fsum(sim.gross.ravel())
    tot_c = int(sim.path_counts.sum())
    return {
        "intensity_total": tot_i,
        "intensity_offdiag": tot_i - diag_i,
        "paths_total": tot_c,
        "paths_offdiag": tot_c - diag_c,
    }
