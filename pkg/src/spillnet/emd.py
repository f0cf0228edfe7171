"""Signatures of intensity distributions and earth mover's distance.

The distance is the optimum of a balanced transportation problem, solved
here with the transportation simplex (northwest-corner start, MODI
potentials). For a 1-D ground distance the optimum also has a closed form,
the area between the two CDFs, which serves as an independent check.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from spillnet.errors import DataError, NumericalError
from spillnet.ingest import MAIN_GROUPS

MASS_TOL = 1e-9
DEFAULT_BINS = 20


@dataclass(frozen=True)
class Signature:
    """Cluster means (ascending) with weights summing to one."""

    means: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.means, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if m.shape != w.shape or m.size == 0:
            raise ValueError("signature needs matching, non-empty means and weights")
        if not np.all(np.isfinite(m)):
            raise ValueError("cluster means must be finite")
        if np.any(w <= 0):
            raise ValueError("cluster weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"cluster weights sum to {w.sum()!r}, expected 1")
        order = np.argsort(m, kind="stable")
        object.__setattr__(self, "means", m[order])
        object.__setattr__(self, "weights", w[order])

    def __len__(self) -> int:
        return self.means.size

    def shifted(self, c: float) -> Signature:
        return Signature(self.means + c, self.weights, self.label)


@dataclass(frozen=True)
class TransportPlan:
    flows: np.ndarray
    cost: float
    iterations: int = 0


def build_signature(values, n_bins: int = DEFAULT_BINS, scale: float | None = None,
                    value_range: tuple[float, float] = (0.0, 1.0), label: str = "") -> Signature:
    """Histogram ``values / scale`` into ``n_bins`` equal-width bins over
    ``value_range``; each non-empty bin becomes a cluster (mean of members,
    weight = share of members).

    ``scale`` defaults to ``max(|values|)``; pass a shared scale to compare
    two samples on one axis.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise DataError("cannot build a signature from an empty sample")
    if not np.all(np.isfinite(x)):
        raise DataError("intensities must be finite")
    lo, hi = value_range
    if lo >= 0 and np.any(x < 0):
        raise DataError("intensities must be non-negative")
    if scale is None:
        scale = float(np.max(np.abs(x)))
    if scale <= 0:
        scale = 1.0
    y = x / scale
    if np.any(y < lo - 1e-12) or np.any(y > hi + 1e-12):
        raise DataError("normalized values fall outside the binning range")
    pos = np.floor((y - lo) / (hi - lo) * n_bins).astype(int)
    pos = np.clip(pos, 0, n_bins - 1)
    means, weights = [], []
    for b in range(n_bins):
        members = y[pos == b]
        if members.size:
            means.append(members.mean())
            weights.append(members.size)
    w = np.asarray(weights, dtype=float)
    return Signature(np.asarray(means), w / w.sum(), label)


def _northwest_corner(supply, demand):
    m, n = supply.size, demand.size
    a, b = supply.copy(), demand.copy()
    flows = np.zeros((m, n))
    basis = []
    i = j = 0
    while i < m and j < n:
        x = min(a[i], b[j])
        flows[i, j] = x
        basis.append((i, j))
        a[i] -= x
        b[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if j == n - 1 or (a[i] <= b[j] and i < m - 1):
            i += 1
        else:
            j += 1
    return flows, basis


def _potentials(cost, basis, m, n):
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    rows = [[] for _ in range(m)]
    cols = [[] for _ in range(n)]
    for i, j in basis:
        rows[i].append(j)
        cols[j].append(i)
    u[0] = 0.0
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        if kind == "r":
            for j in rows[k]:
                if np.isnan(v[j]):
                    v[j] = cost[k, j] - u[k]
                    queue.append(("c", j))
        else:
            for i in cols[k]:
                if np.isnan(u[i]):
                    u[i] = cost[i, k] - v[k]
                    queue.append(("r", i))
    return u, v


def _cycle(basis, m, enter):
    """Cells of the loop closed by ``enter``, starting with it (alternating +/-)."""
    adj = {}
    for i, j in basis:
        adj.setdefault(("r", i), []).append(("c", j))
        adj.setdefault(("c", j), []).append(("r", i))
    start, goal = ("c", enter[1]), ("r", enter[0])
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in adj.get(node, ()):
            if nxt not in prev:
                prev[nxt] = node
                queue.append(nxt)
    if goal not in prev:
        raise NumericalError("transport basis is not a spanning tree")
    path = []
    node = goal
    while node is not None:
        path.append(node)
        node = prev[node]
    # path runs row(enter) -> ... -> col(enter); consecutive nodes are basis cells
    cells = [enter]
    for a, b in zip(path[:-1], path[1:]):
        r, c = (a, b) if a[0] == "r" else (b, a)
        cells.append((r[1], c[1]))
    return cells


def solve_transport(supply, demand, cost, max_iter: int = 10_000) -> TransportPlan:
    """Exact balanced transportation problem: min sum f_ij c_ij subject to
    row sums ``supply`` and column sums ``demand``."""
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = supply.size, demand.size
    if cost.shape != (m, n):
        raise ValueError("cost matrix shape does not match supply and demand")
    if np.any(supply < 0) or np.any(demand < 0):
        raise ValueError("supply and demand must be non-negative")
    if abs(supply.sum() - demand.sum()) > MASS_TOL:
        raise DataError("unbalanced transportation problem: masses differ")
    flows, basis = _northwest_corner(supply, demand)
    scale = max(1.0, float(np.abs(cost).max(initial=0.0)))
    it = 0
    for it in range(1, max_iter + 1):
        u, v = _potentials(cost, basis, m, n)
        reduced = cost - u[:, None] - v[None, :]
        in_basis = np.zeros((m, n), dtype=bool)
        for cell in basis:
            in_basis[cell] = True
        reduced[in_basis] = 0.0
        # Bland-style first improving cell once we have iterated a while (anti-cycling)
        if it > 50 * (m + n):
            cand = np.argwhere(reduced < -1e-12 * scale)
            if cand.size == 0:
                break
            enter = tuple(cand[0])
        else:
            k = int(np.argmin(reduced))
            enter = divmod(k, n)
            if reduced[enter] >= -1e-12 * scale:
                break
        cells = _cycle(basis, m, enter)
        minus = cells[1::2]
        theta = min(flows[c] for c in minus)
        leave = next(c for c in minus if flows[c] == theta)
        for c in cells[0::2]:
            flows[c] += theta
        for c in minus:
            flows[c] -= theta
        flows[leave] = 0.0
        basis[basis.index(leave)] = enter
    else:
        raise NumericalError("transportation simplex did not terminate")
    np.maximum(flows, 0.0, out=flows)
    return TransportPlan(flows, float(np.sum(flows * cost)), it)


def emd_transport(s1: Signature, s2: Signature) -> TransportPlan:
    """EMD between two unit-mass signatures with ground distance |x - y|."""
    cost = np.abs(s1.means[:, None] - s2.means[None, :])
    return solve_transport(s1.weights, s2.weights, cost)


def emd_closed_form_1d(s1: Signature, s2: Signature) -> float:
    """Integral of |F1 - F2| over the merged support."""
    xs = np.union1d(s1.means, s2.means)
    f1 = np.array([s1.weights[s1.means <= x].sum() for x in xs[:-1]])
    f2 = np.array([s2.weights[s2.means <= x].sum() for x in xs[:-1]])
    return float(np.sum(np.abs(f1 - f2) * np.diff(xs)))


def emd(s1: Signature, s2: Signature) -> float:
    return emd_transport(s1, s2).cost


@dataclass(frozen=True)
class EmdTable:
    """EMD (percent) per (period pair, from group, to group); NaN marks a
    cell with no spillover paths in one of the two periods."""

    groups: list[str]
    period_pairs: list[tuple[str, str]]
    values: np.ndarray
    options: dict = field(default_factory=dict)


def _cell_values(net, src: list[int], dst: list[int]) -> np.ndarray:
    s = net.intensity
    ind = net.indicator
    return np.array([s[i, j] for i in src for j in dst if i != j and ind[i, j]])


def period_emd_table(nets, groups=MAIN_GROUPS, n_bins: int = DEFAULT_BINS,
                     signed: bool = False) -> EmdTable:
    """EMD between adjacent periods for every directed group pair.

    Intensities of both periods are divided by their common maximum, so the
    ground distance lies in [0, 1]; the result is reported in percent. With
    ``signed=True`` the cell (m, n) pools both directions, the n -> m
    intensities negated, and bins span [-1, 1].
    """
    nets = list(nets)
    if len(nets) < 2:
        raise DataError("need at least two periods")
    for net in nets[1:]:
        if list(net.nodes) != list(nets[0].nodes):
            raise DataError("networks must share the same node order")
    tags = nets[0].groups()
    members = {g: [k for k, t in enumerate(tags) if t == g] for g in groups}
    labels = [net.period.name if net.period is not None else f"period{k + 1}" for k, net in enumerate(nets)]
    pairs = list(zip(labels[:-1], labels[1:]))
    out = np.full((len(pairs), len(groups), len(groups)), np.nan)
    for p in range(len(pairs)):
        a, b = nets[p], nets[p + 1]
        for x, gm in enumerate(groups):
            for y, gn in enumerate(groups):
                va = _cell_values(a, members[gm], members[gn])
                vb = _cell_values(b, members[gm], members[gn])
                if signed:
                    va = np.concatenate([va, -_cell_values(a, members[gn], members[gm])])
                    vb = np.concatenate([vb, -_cell_values(b, members[gn], members[gm])])
                if va.size == 0 or vb.size == 0:
                    continue
                scale = float(max(np.abs(va).max(), np.abs(vb).max()))
                rng = (-1.0, 1.0) if signed else (0.0, 1.0)
                s1 = build_signature(va, n_bins, scale, rng)
                s2 = build_signature(vb, n_bins, scale, rng)
                out[p, x, y] = 100.0 * emd(s1, s2)
    return EmdTable(list(groups), pairs, out, {"n_bins": n_bins, "signed": signed})
