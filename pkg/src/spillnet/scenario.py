"""Synthetic multi-index price panels from an N-dimensional BEKK(1,1) scenario.

A scenario JSON looks like::

    {
      "indices": [{"code": "900001", "group": "Ke", "sector": "S1"}, ...],
      "days": 20, "minutes_per_day": 200, "start": "2020-01-02",
      "periods": [{"name": "period1", "days": 10}, {"name": "period2", "days": 10}],
      "a_diag": 0.2, "b_diag": 0.9, "variance": 1e-6,
      "spillovers": [{"from": "900001", "to": "900002", "a": 0.3, "b": 0.0}],
      "group_spillovers": [{"from": "Ke", "to": "Cg", "a": 0.3}]
    }

``a`` on an edge i -> j is the A entry in row i, column j, so shocks to i
feed the conditional variance of j. The intercept is diagonal with
``omega_i = variance_i * (1 - a_ii^2 - b_ii^2)``.
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from spillnet.errors import CovarianceRecursionError, DataError
from spillnet.ingest import GROUP_TAGS, PricePanel

DEFAULT_BURN_IN = 500
OPEN_TIME = np.timedelta64(9 * 60 + 30, "m")


@dataclass(frozen=True)
class Scenario:
    codes: list[str]
    groups: list[str]
    sectors: list[str]
    mu: np.ndarray
    cc: np.ndarray
    a: np.ndarray
    b: np.ndarray
    days: int
    minutes_per_day: int
    start: dt.date
    periods: list[tuple[str, int]]

    @property
    def n_obs(self) -> int:
        return self.days * self.minutes_per_day


def _per_node(value, codes, name) -> np.ndarray:
    if isinstance(value, dict):
        return np.array([float(value[c]) for c in codes])
    if isinstance(value, (list, tuple)):
        if len(value) != len(codes):
            raise DataError(f"{name} needs one value per index")
        return np.asarray(value, dtype=float)
    return np.full(len(codes), float(value))


def parse_scenario(raw: dict) -> Scenario:
    try:
        items = raw["indices"]
        codes = [str(it["code"]) for it in items]
        groups = [str(it.get("group", "Ungrouped")) for it in items]
    except (KeyError, TypeError) as exc:
        raise DataError(f"scenario needs an 'indices' list with codes: {exc}") from None
    if len(set(codes)) != len(codes):
        dup = sorted({c for c in codes if codes.count(c) > 1})
        raise DataError(f"duplicate index code in scenario: {', '.join(dup)}")
    for g in groups:
        if g not in GROUP_TAGS:
            raise DataError(f"unknown group tag {g!r}")
    sectors = [str(it.get("sector", it.get("group", ""))) for it in items]
    n = len(codes)
    pos = {c: k for k, c in enumerate(codes)}
    a = np.diag(_per_node(raw.get("a_diag", 0.2), codes, "a_diag"))
    b = np.diag(_per_node(raw.get("b_diag", 0.9), codes, "b_diag"))
    for edge in raw.get("group_spillovers", []):
        src = [k for k, g in enumerate(groups) if g == edge["from"]]
        dst = [k for k, g in enumerate(groups) if g == edge["to"]]
        for i in src:
            for j in dst:
                if i != j:
                    a[i, j] += float(edge.get("a", 0.0))
                    b[i, j] += float(edge.get("b", 0.0))
    for edge in raw.get("spillovers", []):
        try:
            i, j = pos[str(edge["from"])], pos[str(edge["to"])]
        except KeyError as exc:
            raise DataError(f"spillover refers to unknown code {exc}") from None
        a[i, j] += float(edge.get("a", 0.0))
        b[i, j] += float(edge.get("b", 0.0))
    var = _per_node(raw.get("variance", 1e-6), codes, "variance")
    omega = var * (1.0 - np.diag(a) ** 2 - np.diag(b) ** 2)
    if np.any(omega <= 0):
        raise DataError("diagonal a^2 + b^2 must stay below 1")
    days = int(raw.get("days", 20))
    mpd = int(raw.get("minutes_per_day", 240))
    if days < 1 or mpd < 1:
        raise DataError("days and minutes_per_day must be positive")
    periods = [(str(p["name"]), int(p["days"])) for p in raw.get("periods", [])]
    if periods and sum(d for _, d in periods) > days:
        raise DataError("periods cover more days than simulated")
    return Scenario(codes, groups, sectors, _per_node(raw.get("mu", 0.0), codes, "mu"),
                    np.diag(omega), a, b, days, mpd,
                    dt.date.fromisoformat(str(raw.get("start", "2020-01-02"))), periods)


def load_scenario(path) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(raw)


def _operator(x, a, b):
    return a.T @ x @ a + b.T @ x @ b


def spectral_radius(a: np.ndarray, b: np.ndarray) -> float:
    """Spectral radius of A (x) A + B (x) B."""
    n = a.shape[0]
    if n <= 20:
        m = np.kron(a, a) + np.kron(b, b)
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    # the map X -> A'XA + B'XB preserves the PSD cone, so power iteration
    # from the identity finds the Perron root
    x = np.eye(n)
    rate = 0.0
    for _ in range(2000):
        y = _operator(x, a, b)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        new = nrm / np.linalg.norm(x)
        x = y / nrm
        if abs(new - rate) < 1e-12:
            break
        rate = new
    return float(rate)


def unconditional_covariance(sc: Scenario) -> np.ndarray:
    h = sc.cc.copy()
    for _ in range(100_000):
        new = sc.cc + _operator(h, sc.a, sc.b)
        if np.max(np.abs(new - h)) <= 1e-15 * np.max(np.abs(new)):
            return 0.5 * (new + new.T)
        h = new
    return 0.5 * (h + h.T)


def simulate_returns(sc: Scenario, seed: int, burn_in: int = DEFAULT_BURN_IN) -> np.ndarray:
    """T x N Gaussian BEKK returns started at the unconditional covariance."""
    radius = spectral_radius(sc.a, sc.b)
    if radius >= 1.0:
        raise DataError(f"scenario is not covariance stationary (spectral radius {radius:.6g})")
    rng = np.random.default_rng(seed)
    n = len(sc.codes)
    total = sc.n_obs + burn_in
    z = rng.standard_normal((total, n))
    h = unconditional_covariance(sc)
    out = np.empty((total, n))
    for t in range(total):
        try:
            low = np.linalg.cholesky(h)
        except np.linalg.LinAlgError:
            raise CovarianceRecursionError(t) from None
        e = low @ z[t]
        out[t] = sc.mu + e
        v = sc.a.T @ e
        h = sc.cc + np.outer(v, v) + sc.b.T @ h @ sc.b
        h = 0.5 * (h + h.T)
    return np.ascontiguousarray(out[burn_in:])


def trading_days(start: dt.date, count: int) -> list[dt.date]:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return [d.astype(dt.date) for d in np.busday_offset(first, np.arange(count))]


def to_price_panel(sc: Scenario, returns: np.ndarray, base: float = 100.0) -> PricePanel:
    """Prices 100 * exp(cumulative return); each day opens at the previous close
    and has ``minutes_per_day`` returns after the opening minute."""
    m = sc.minutes_per_day
    logp = np.log(base) + np.cumsum(returns, axis=0)
    rows, stamps = [], []
    prev = np.full(len(sc.codes), np.log(base))
    for d, day in enumerate(trading_days(sc.start, sc.days)):
        block = logp[d * m:(d + 1) * m]
        rows.append(prev[None, :])
        rows.append(block)
        prev = block[-1]
        t0 = np.datetime64(day, "m") + OPEN_TIME
        stamps.append(t0 + np.arange(m + 1).astype("timedelta64[m]"))
    ts = np.concatenate(stamps).astype("datetime64[ns]")
    return PricePanel(list(sc.codes), ts, ts.astype("datetime64[D]"), np.exp(np.vstack(rows)))


def scenario_periods(sc: Scenario) -> list[dict]:
    days = trading_days(sc.start, sc.days)
    out, k = [], 0
    for name, count in sc.periods:
        out.append({"name": name, "start": days[k].isoformat(), "end": days[k + count - 1].isoformat()})
        k += count
    return out


def scenario_grouping(sc: Scenario) -> dict:
    return {c: {"sector": s, "group": g} for c, s, g in zip(sc.codes, sc.sectors, sc.groups)}
