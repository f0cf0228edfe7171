"""Weighted k-shell decomposition and weighted betweenness centrality."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from spillnet.network import SpilloverNetwork

TIE_RTOL = 1e-9


@dataclass(frozen=True)
class ShellAssignment:
    """Shell label per node (contiguous 1..max_shell) and the pruning
    threshold that was active when the node was removed."""

    shells: dict
    thresholds: dict

    @property
    def max_shell(self) -> int:
        return max(self.shells.values(), default=0)

    def __getitem__(self, code):
        return self.shells[code]


@dataclass(frozen=True)
class CentralityScores:
    wbc: dict
    alpha: float

    def __getitem__(self, code):
        return self.wbc[code]


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def _degree_strength(w: np.ndarray, alive: np.ndarray, strength: str):
    sub = w * alive[:, None] * alive[None, :]
    link = (sub > 0) | (sub.T > 0)
    k = link.sum(axis=1).astype(float)
    if strength == "out":
        o = sub.sum(axis=1)
    elif strength == "total":
        o = sub.sum(axis=1) + sub.sum(axis=0)
    else:
        raise ValueError(f"unknown strength mode {strength!r}")
    return k, o


def weighted_kshell(net: SpilloverNetwork, alpha: float = 1.0, beta: float = 1.0,
                    strength: str = "out") -> ShellAssignment:
    """Iterative pruning on wk_i = (k_i^alpha * O_i^beta)^(1 / (alpha + beta)).

    At the start of each stage the surviving edge intensities are divided by
    their minimum and rounded to the nearest integer. Nodes with
    ``wk <= threshold`` are removed repeatedly; the removed batch forms the
    next shell. A stage that removes nothing raises the threshold to the
    ceiling of the smallest wk.

    Parameters
    ----------
    alpha, beta : float
        Exponents on degree and strength, both > 0.
    strength : {"out", "total"}
        Use out-strength (default) or in + out strength for O_i.
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    n = len(net.nodes)
    s = net.intensity
    alive = np.ones(n, dtype=bool)
    shells, thresholds = {}, {}
    label, threshold = 1, 1.0
    while alive.any():
        sub = s * alive[:, None] * alive[None, :]
        pos = sub[sub > 0]
        w = _round_half_up(sub / pos.min()) if pos.size else np.zeros_like(sub)
        removed = False
        while True:
            k, o = _degree_strength(w, alive, strength)
            wk = (k**alpha * o**beta) ** (1.0 / (alpha + beta))
            drop = alive & (wk <= threshold)
            if not drop.any():
                break
            for idx in np.flatnonzero(drop):
                shells[net.nodes[idx]] = label
                thresholds[net.nodes[idx]] = int(threshold)
            alive &= ~drop
            removed = True
        if removed:
            label += 1
            threshold += 1
        elif alive.any():
            threshold = float(math.ceil(wk[alive].min()))
    return ShellAssignment(shells, thresholds)


def _lengths(net: SpilloverNetwork, alpha: float) -> list[list[tuple[int, float]]]:
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    s = net.intensity
    n = len(net.nodes)
    adj = []
    for i in range(n):
        row = []
        for j in range(n):
            if i != j and net.indicator[i, j] and s[i, j] > 0:
                row.append((j, float(s[i, j]) ** -alpha))
        adj.append(row)
    return adj


def _tied(d1: float, d2: float) -> bool:
    return abs(d1 - d2) <= TIE_RTOL * max(1.0, d1)


def _single_source(adj, src: int):
    """Dijkstra with path counting; returns (dist, sigma, preds, order)."""
    n = len(adj)
    dist = [math.inf] * n
    sigma = [0.0] * n
    preds = [[] for _ in range(n)]
    dist[src] = 0.0
    sigma[src] = 1.0
    done = [False] * n
    order = []
    heap = [(0.0, src)]
    while heap:
        d, v = heapq.heappop(heap)
        if done[v] or d > dist[v]:
            continue
        done[v] = True
        order.append(v)
        for w, length in adj[v]:
            if done[w]:
                continue
            nd = d + length
            if dist[w] < math.inf and _tied(dist[w], nd):
                sigma[w] += sigma[v]
                preds[w].append(v)
            elif nd < dist[w]:
                dist[w] = nd
                sigma[w] = sigma[v]
                preds[w] = [v]
                heapq.heappush(heap, (nd, w))
    return dist, sigma, preds, order


def shortest_distance(net: SpilloverNetwork, alpha: float = 0.5):
    """All-pairs shortest distances with edge length s_ij^(-alpha).

    Returns
    -------
    dist : ndarray
        ``inf`` for unreachable pairs, 0 on the diagonal.
    counts : ndarray
        Number of distinct minimum-length paths (0 when unreachable).
    interior : dict
        ``(j, k) -> frozenset`` of node codes interior to some shortest path.
    """
    adj = _lengths(net, alpha)
    n = len(adj)
    dist = np.full((n, n), np.inf)
    counts = np.zeros((n, n))
    for src in range(n):
        d, sig, _, _ = _single_source(adj, src)
        dist[src] = d
        counts[src] = sig
    interior = {}
    for j in range(n):
        for k in range(n):
            if j == k or not np.isfinite(dist[j, k]):
                continue
            mids = [net.nodes[i] for i in range(n)
                    if i not in (j, k) and np.isfinite(dist[j, i] + dist[i, k])
                    and _tied(dist[j, k], dist[j, i] + dist[i, k])]
            interior[(net.nodes[j], net.nodes[k])] = frozenset(mids)
    return dist, counts, interior


def weighted_betweenness(net: SpilloverNetwork, alpha: float = 0.5) -> CentralityScores:
    """WBC_i = sum over ordered pairs (j, k) of g_jk(i) / g_jk (Brandes accumulation)."""
    adj = _lengths(net, alpha)
    n = len(adj)
    score = [0.0] * n
    for src in range(n):
        _, sigma, preds, order = _single_source(adj, src)
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != src:
                score[w] += delta[w]
    return CentralityScores({c: score[k] for k, c in enumerate(net.nodes)}, float(alpha))
