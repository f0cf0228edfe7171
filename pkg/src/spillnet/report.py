"""Deterministic text renderers for every report artifact."""
from __future__ import annotations

import io
import json
import math

import numpy as np

from spillnet.centrality import CentralityScores, ShellAssignment
from spillnet.emd import EmdTable
from spillnet.ingest import StatsRow
from spillnet.network import (
    GroupIndicators,
    SectorInfluenceMatrix,
    SpilloverNetwork,
    group_totals,
    node_connectivity,
)
from spillnet.paths import Arborescence, GroupDigraph, MajorPathSet

GROUP_COLORS = {
    "Ke": "#1f77b4",
    "Cg": "#ff7f0e",
    "Kg": "#2ca02c",
    "Us": "#d62728",
    "Ungrouped": "#7f7f7f",
}


def fmt(x) -> str:
    """Six significant digits; NaN prints as NA."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NA"
    if x == 0:
        return "0"
    return format(x, ".6g")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def stats_csv(rows: list[StatsRow]) -> str:
    header = ["code", "mean", "sd", "skewness", "kurtosis", "jb_stat", "jb_pvalue", "ar1", "n_obs"]
    return _csv(header, [[r.code, r.mean, r.sd, r.skewness, r.kurtosis, r.jb_stat, r.jb_pvalue, r.ar1, r.n_obs]
                         for r in rows])


def fits_csv(fits_by_period: list[tuple[str, list]]) -> str:
    from spillnet.bekk.model import PARAM_NAMES

    header = ["period", "code_i", "code_j", "converged", "loglik", "n_obs", "grad_norm", "restarts", "vcov_method",
              *PARAM_NAMES, "joint_stat", "joint_p", "dir_ij_stat", "dir_ij_p", "dir_ji_stat", "dir_ji_p"]
    rows = []
    for period, fits in fits_by_period:
        for f in fits:
            tests = []
            if f.tests is not None:
                for t in f.tests:
                    tests += [t.statistic, t.p_value]
            else:
                tests = [math.nan] * 6
            rows.append([period, f.pair[0], f.pair[1], bool(f.converged), f.loglik, f.n_obs, f.gradient_norm,
                         f.n_restarts_used, f.vcov_method, *f.theta, *tests])
    return _csv(header, rows)


def network_json(net: SpilloverNetwork) -> str:
    doc = {
        "period": net.period.name if net.period is not None else None,
        "nodes": list(net.nodes),
        "edges": [{"from": e.source, "to": e.target, "w": float(fmt(e.w)), "s": float(fmt(e.s))}
                  for e in net.edges()],
        "n_pairs": net.n_pairs,
        "n_nonconverged": net.n_nonconverged,
    }
    return json.dumps(doc, indent=2) + "\n"


def indicators_rows(period: str, net: SpilloverNetwork, gi: GroupIndicators,
                    shells: ShellAssignment, wbc: CentralityScores) -> list[list]:
    tags = net.groups()
    rows = []
    for node, tag in zip(node_connectivity(net), tags):
        c = node.code
        rows.append([period, c, tag, node.out_strength, node.in_strength, node.ri, gi.toto[c], gi.tifo[c],
                     shells[c], wbc[c]])
    return rows


def indicators_csv(rows) -> str:
    return _csv(["period", "code", "group", "O", "I", "ri", "TOTO", "TIFO", "shell", "wbc"], rows)


def group_table_rows(period: str, gi: GroupIndicators, sim: SectorInfluenceMatrix) -> list[list]:
    """Long-format rows: period, table, row, column, value."""
    rows = []
    for s in gi.summaries:
        for name, values, ratio in (("TOTO", s.toto, s.toto_ratio), ("TIFO", s.tifo, s.tifo_ratio)):
            v = np.array(list(values.values()), dtype=float)
            stats = (v.min(), float(np.median(v)), v.max()) if v.size else (math.nan,) * 3
            for label, x in zip(("min", "median", "max"), stats):
                rows.append([period, name, s.group, label, x])
            rows.append([period, name, s.group, "ratio_pct", ratio])
    for table, mat in (("intensity", sim.gross), ("paths", sim.path_counts), ("SI", sim.si)):
        for a, ga in enumerate(sim.groups):
            for b, gb in enumerate(sim.groups):
                rows.append([period, table, ga, gb, mat[a, b]])
    for key, value in group_totals(sim).items():
        rows.append([period, "totals", key, "", value])
    return rows


def group_tables_csv(rows) -> str:
    return _csv(["period", "table", "row", "column", "value"], rows)


def major_paths_rows(period: str, sets: list[MajorPathSet]) -> list[list]:
    rows = []
    for ps in sets:
        for rank, e in enumerate(ps.edges, start=1):
            rows.append([period, ps.scope_label, e.source, e.target, e.s, rank])
    return rows


def major_paths_csv(rows) -> str:
    return _csv(["period", "scope", "from", "to", "s", "rank"], rows)


def emd_csv(table: EmdTable) -> str:
    header = ["from"]
    for a, b in table.period_pairs:
        header += [f"{a} vs {b}:{g}" for g in table.groups]
    rows = []
    for x, gm in enumerate(table.groups):
        row = [gm]
        for p in range(len(table.period_pairs)):
            for y in range(len(table.groups)):
                v = table.values[p, x, y]
                row.append("NA" if math.isnan(v) else f"{v:.2f}")
        rows.append(row)
    return _csv(header, rows)


def arborescence_rows(period: str, arb: Arborescence) -> list[list]:
    return [[period, arb.root, u, v, w] for u, v, w in arb.edges]


def arborescence_csv(rows) -> str:
    return _csv(["period", "root", "from", "to", "net"], rows)


# ---------------------------------------------------------------------------
# DOT


def _q(s: str) -> str:
    return '"' + str(s).replace('"', '\\"') + '"'


def top_edges(net: SpilloverNetwork, edge_quantile: float):
    if not 0 < edge_quantile <= 1:
        raise ValueError("edge_quantile must lie in (0, 1]")
    edges = sorted(net.edges(), key=lambda e: (-e.s, e.source, e.target))
    return edges[: math.ceil(edge_quantile * len(edges))] if edges else []


def emit_dot(net: SpilloverNetwork, edge_quantile: float = 0.05, name: str = "spillover") -> str:
    """DOT digraph of the top ``edge_quantile`` share of edges by intensity.

    Nodes carry their group as class and fill colour and a size proportional
    to out-strength; edge penwidth is proportional to intensity.
    """
    tags = net.groups() if net.grouping is not None else ["Ungrouped"] * len(net.nodes)
    conn = node_connectivity(net)
    omax = max((c.out_strength for c in conn), default=0.0)
    edges = top_edges(net, edge_quantile)
    smax = max((e.s for e in edges), default=0.0)
    lines = [f"digraph {_q(name)} {{", "  node [shape=circle, style=filled, fontsize=10];"]
    for c, tag in zip(conn, tags):
        size = 0.3 + (0.9 * c.out_strength / omax if omax > 0 else 0.0)
        lines.append(f"  {_q(c.code)} [class={_q(tag)}, fillcolor={_q(GROUP_COLORS.get(tag, '#7f7f7f'))}, "
                     f"width={size:.3f}, O={_q(fmt(c.out_strength))}];")
    for e in edges:
        pen = 0.5 + 4.5 * e.s / smax if smax > 0 else 1.0
        lines.append(f"  {_q(e.source)} -> {_q(e.target)} [s={_q(fmt(e.s))}, penwidth={pen:.3f}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_group_dot(g: GroupDigraph, arb: Arborescence | None = None, name: str = "groups") -> str:
    """Net inter-group spillovers; arborescence edges black, the rest grey."""
    tree = {(u, v) for u, v, _ in arb.edges} if arb is not None else set()
    lines = [f"digraph {_q(name)} {{", "  node [shape=box, style=filled];"]
    for tag in g.nodes:
        extra = ", peripheries=2" if arb is not None and tag == arb.root else ""
        lines.append(f"  {_q(tag)} [fillcolor={_q(GROUP_COLORS[tag])}{extra}];")
    for u, v, w in g.edges():
        color = "black" if (u, v) in tree else "grey70"
        lines.append(f"  {_q(u)} -> {_q(v)} [label={_q(fmt(w))}, color={_q(color)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"

