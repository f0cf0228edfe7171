"""End-to-end run: prices -> pairwise fits -> networks -> indicators -> reports."""
from __future__ import annotations

import contextlib
import hashlib
import itertools
import json
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from spillnet import report
from spillnet.bekk.estimate import FitOptions
from spillnet.bekk.wald import fit_and_test
from spillnet.centrality import weighted_betweenness, weighted_kshell
from spillnet.config import PipelineConfig
from spillnet.emd import period_emd_table
from spillnet.errors import ConfigError, DataError, NumericalError, SpillnetError
from spillnet.ingest import (
    MAIN_GROUPS,
    ReturnPanel,
    compute_log_returns,
    default_grouping,
    default_periods,
    load_grouping,
    load_periods,
    load_price_panel,
    split_periods,
    stats_table,
)
from spillnet.network import build_network, group_connectivity, sector_influence
from spillnet.paths import all_major_paths, group_net_digraph, max_arborescence

# cumulative stage order; each CLI subcommand stops at one of these
STAGES = ("stats", "fit", "network", "analyze", "emd", "paths", "report")


@dataclass
class ReportBundle:
    out_dir: Path
    files: dict = field(default_factory=dict)  # name -> sha256
    manifest: Path | None = None
    networks: list = field(default_factory=list)


def _reclassify(exc: Exception) -> type[SpillnetError]:
    for cls in (ConfigError, DataError, NumericalError):
        if isinstance(exc, cls):
            return cls
    if isinstance(exc, (np.linalg.LinAlgError, ArithmeticError)):
        return NumericalError
    if isinstance(exc, (ValueError, KeyError, OSError)):
        return DataError
    return SpillnetError


@contextlib.contextmanager
def stage(name: str, entity: str = ""):
    """Prefix errors raised inside a stage with its name and the offending entity."""
    try:
        yield
    except (SpillnetError, ValueError, KeyError, OSError, ArithmeticError) as exc:
        where = f"[{name}:{entity}]" if entity else f"[{name}]"
        if str(exc).startswith("["):
            raise
        raise _reclassify(exc)(f"{where} {exc}") from exc


def _fit_task(args):
    pair, data, opts = args
    with stage("fit", f"{pair[0]}-{pair[1]}"):
        return fit_and_test(data, opts, pair)


def fit_all_pairs(panel: ReturnPanel, opts: FitOptions, workers: int = 1) -> list:
    """Fit every unordered pair (i < j in code order); results come back in pair order."""
    pairs = list(itertools.combinations(range(len(panel.codes)), 2))
    tasks = [((panel.codes[i], panel.codes[j]), panel.observations[:, [i, j]], opts) for i, j in pairs]
    if workers <= 1 or len(tasks) <= 1:
        return [_fit_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_fit_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _config_echo(cfg: PipelineConfig) -> dict:
    echo = cfg.to_dict()
    # the worker count and output location do not change any result
    echo.pop("workers", None)
    echo.pop("out_dir", None)
    for key in ("prices", "grouping", "periods"):
        if echo.get(key):
            echo[key] = Path(echo[key]).name
    return echo


def verify_manifest(out_dir) -> list[str]:
    """Names of files whose content no longer matches the manifest."""
    out_dir = Path(out_dir)
    doc = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
    bad = []
    for name, digest in doc["files"].items():
        p = out_dir / name
        if not p.exists() or _sha256(p) != digest:
            bad.append(name)
    return bad


def run_pipeline(cfg: PipelineConfig, until: str = "report") -> ReportBundle:
    """Run the stages up to ``until`` and write their artifacts to ``cfg.out_dir``.

    Files are assembled in a staging directory and moved into place only when
    every stage has succeeded, so a failed run leaves no partial outputs.
    """
    if until not in STAGES:
        raise ConfigError(f"unknown stage {until!r}")
    if cfg.prices is None:
        raise ConfigError("no price file configured")
    last = STAGES.index(until)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    texts: dict[str, str] = {}
    try:
        bundle = _run(cfg, last, texts)
        for name, text in texts.items():
            (staging / name).write_text(text, encoding="utf-8", newline="\n")
        hashes = {name: _sha256(staging / name) for name in sorted(texts)}
        manifest = {"config": _config_echo(cfg), "stage": until, "files": hashes}
        (staging / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                               encoding="utf-8", newline="\n")
        for name in [*sorted(texts), "manifest.json"]:
            (staging / name).replace(out_dir / name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    bundle.out_dir = out_dir
    bundle.files = hashes
    bundle.manifest = out_dir / "manifest.json"
    return bundle


def _run(cfg: PipelineConfig, last: int, texts: dict) -> ReportBundle:
    with stage("ingest", str(cfg.prices)):
        panel = load_price_panel(cfg.prices, cfg.price_format, cfg.max_gap)
        grouping = load_grouping(cfg.grouping) if cfg.grouping else default_grouping()
        periods = load_periods(cfg.periods) if cfg.periods else default_periods()
        grouping.check_covers(panel.codes)
        returns = compute_log_returns(panel)
        panels = split_periods(returns, periods)

    with stage("stats"):
        texts["stats.csv"] = report.stats_csv(stats_table(returns))
    bundle = ReportBundle(Path(cfg.out_dir))
    if last < STAGES.index("fit"):
        return bundle

    opts = cfg.fit_options()
    fits_by_period = []
    for spec, sub in zip(periods, panels):
        with stage("fit", spec.name):
            fits_by_period.append((spec.name, fit_all_pairs(sub, opts, cfg.workers)))
    texts["fits.csv"] = report.fits_csv(fits_by_period)
    if last < STAGES.index("network"):
        return bundle

    nets = []
    for spec, (_, fits) in zip(periods, fits_by_period):
        with stage("network", spec.name):
            net = build_network(fits, panel.codes, grouping, cfg.significance, spec)
        nets.append(net)
        texts[f"network_{spec.name}.json"] = report.network_json(net)
    bundle.networks = nets
    if last < STAGES.index("analyze"):
        return bundle

    ind_rows, table_rows = [], []
    for spec, net in zip(periods, nets):
        with stage("analyze", spec.name):
            gi = group_connectivity(net)
            sim = sector_influence(net)
            shells = weighted_kshell(net, cfg.kshell_alpha, cfg.kshell_beta, cfg.kshell_strength)
            wbc = weighted_betweenness(net, cfg.wbc_alpha)
        ind_rows += report.indicators_rows(spec.name, net, gi, shells, wbc)
        table_rows += report.group_table_rows(spec.name, gi, sim)
    texts["indicators.csv"] = report.indicators_csv(ind_rows)
    texts["group_tables.csv"] = report.group_tables_csv(table_rows)
    if last < STAGES.index("emd"):
        return bundle

    if len(nets) >= 2:
        with stage("emd"):
            table = period_emd_table(nets, MAIN_GROUPS, cfg.emd_bins, cfg.emd_signed)
        texts["emd.csv"] = report.emd_csv(table)
    if last < STAGES.index("paths"):
        return bundle

    path_rows, arb_rows = [], []
    for spec, net in zip(periods, nets):
        with stage("paths", spec.name):
            path_rows += report.major_paths_rows(spec.name, all_major_paths(net, MAIN_GROUPS, cfg.major_quantile))
            g = group_net_digraph(sector_influence(net))
            try:
                arb = max_arborescence(g)
            except DataError:
                arb = None
        if arb is not None:
            arb_rows += report.arborescence_rows(spec.name, arb)
        texts[f"groups_{spec.name}.dot"] = report.emit_group_dot(g, arb, f"groups_{spec.name}")
        texts[f"network_{spec.name}.dot"] = report.emit_dot(net, cfg.dot_quantile, f"network_{spec.name}")
    texts["major_paths.csv"] = report.major_paths_csv(path_rows)
    texts["arborescence.csv"] = report.arborescence_csv(arb_rows)
    return bundle
