"""Command line entry point: ``spillnet <command> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from spillnet.config import PipelineConfig, load_config
from spillnet.errors import ConfigError, DataError, NumericalError, SpillnetError
from spillnet.ingest import write_price_panel
from spillnet.pipeline import STAGES, run_pipeline
from spillnet.scenario import load_scenario, scenario_grouping, scenario_periods, simulate_returns, to_price_panel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON pipeline configuration")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, help="parallel workers for pairwise fits")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spillnet", description="Volatility spillover networks from intraday returns.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "stats": "descriptive statistics of log returns",
        "fit": "pairwise BEKK fits and spillover tests per period",
        "network": "fits plus per-period spillover networks",
        "analyze": "networks plus node and group indicators, k-shell and betweenness",
        "emd": "analysis plus earth mover's distances between periods",
        "paths": "everything above plus major paths, arborescence and DOT files",
        "report": "run every stage",
    }
    for name in STAGES:
        p = sub.add_parser(name, help=helps[name])
        _common(p)
        p.add_argument("--prices", help="price CSV (overrides config)")
        p.add_argument("--format", choices=("long", "wide"), dest="price_format")
        p.add_argument("--grouping", help="sector grouping JSON")
        p.add_argument("--periods", help="period definitions JSON")
    p = sub.add_parser("simulate", help="synthetic price panel from a BEKK scenario")
    _common(p)
    p.add_argument("scenario", help="scenario JSON")
    return parser


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    return cfg.replace(
        out_dir=args.out,
        workers=args.workers,
        seed=args.seed,
        prices=getattr(args, "prices", None),
        price_format=getattr(args, "price_format", None),
        grouping=getattr(args, "grouping", None),
        periods=getattr(args, "periods", None),
    )


def simulate_command(scenario_path, out_dir, seed: int = 0) -> dict:
    """Write prices.csv, grouping.json and periods.json for a scenario."""
    sc = load_scenario(scenario_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panel = to_price_panel(sc, simulate_returns(sc, seed))
    files = {"prices": out / "prices.csv", "grouping": out / "grouping.json", "periods": out / "periods.json"}
    write_price_panel(panel, files["prices"])
    files["grouping"].write_text(json.dumps(scenario_grouping(sc), indent=2) + "\n", encoding="utf-8")
    if sc.periods:
        files["periods"].write_text(json.dumps(scenario_periods(sc), indent=2) + "\n", encoding="utf-8")
    else:
        del files["periods"]
    return files


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            files = simulate_command(args.scenario, args.out or ".", args.seed or 0)
            for path in files.values():
                print(path)
            return EXIT_OK
        cfg = _config(args)
        bundle = run_pipeline(cfg, until=args.command)
        for name in bundle.files:
            print(bundle.out_dir / name)
        print(bundle.manifest)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SpillnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
