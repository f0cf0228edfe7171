"""Independent slow oracles shared by the unit and acceptance tests."""
import itertools
import math

import networkx as nx
import numpy as np


def kshell_reference(s, alpha=1.0, beta=1.0):
    """Plain-loop rendition of the pruning procedure on a dense matrix."""
    n = len(s)
    left = set(range(n))
    shell = {}
    label, k = 1, 1
    while left:
        ws = [s[i][j] for i in left for j in left if i != j and s[i][j] > 0]
        lo = min(ws) if ws else 1.0
        norm = [[math.floor(s[i][j] / lo + 0.5) if (i in left and j in left and s[i][j] > 0) else 0
                 for j in range(n)] for i in range(n)]
        took_any = False
        while True:
            score = {}
            for i in left:
                nbrs = {j for j in left if j != i and (norm[i][j] > 0 or norm[j][i] > 0)}
                out = sum(norm[i][j] for j in left if j != i)
                score[i] = (len(nbrs) ** alpha * out ** beta) ** (1 / (alpha + beta))
            take = [i for i in left if score[i] <= k]
            if not take:
                break
            for i in take:
                shell[i] = label
                left.discard(i)
            took_any = True
        if took_any:
            label += 1
            k += 1
        elif left:
            k = math.ceil(min(score.values()))
    return shell


def brute_force_paths(s, alpha):
    """Shortest distances, counts and betweenness over all simple paths."""
    n = len(s)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from((i, j) for i in range(n) for j in range(n) if s[i][j] > 0)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    count = np.zeros((n, n))
    np.fill_diagonal(count, 1.0)
    wbc = np.zeros(n)
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            paths = list(nx.all_simple_paths(g, a, b))
            if not paths:
                continue
            lengths = [sum(s[p[k]][p[k + 1]] ** -alpha for k in range(len(p) - 1)) for p in paths]
            best = min(lengths)
            short = [p for p, x in zip(paths, lengths) if abs(x - best) <= 1e-9 * max(1.0, best)]
            dist[a, b] = best
            count[a, b] = len(short)
            for p in short:
                for v in p[1:-1]:
                    wbc[v] += 1.0 / len(short)
    return dist, count, wbc


def enumerate_arborescences(nodes, w):
    """Every spanning out-tree over positive entries of ``w``, by brute force."""
    n = len(nodes)
    best = -math.inf
    for root in range(n):
        others = [v for v in range(n) if v != root]
        choices = [[u for u in range(n) if u != v and w[u, v] > 0] for v in others]
        for parents in itertools.product(*choices):
            par = dict(zip(others, parents))
            ok = True
            for v in others:
                seen, x = set(), v
                while x != root:
                    if x in seen:
                        ok = False
                        break
                    seen.add(x)
                    x = par[x]
                if not ok:
                    break
            if ok:
                best = max(best, math.fsum(w[par[v], v] for v in others))
    return best
