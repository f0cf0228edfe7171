"""Price panels, intraday log returns, study periods, sector grouping and
descriptive statistics."""
from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from spillnet.errors import DataError

GROUP_TAGS = ("Ke", "Cg", "Kg", "Us", "Ungrouped")
MAIN_GROUPS = ("Ke", "Cg", "Kg", "Us")
DEFAULT_MAX_GAP = 5


@dataclass(frozen=True)
class PricePanel:
    codes: list[str]
    timestamps: np.ndarray  # datetime64[ns], strictly increasing
    days: np.ndarray  # datetime64[D] trading-day label per row
    prices: np.ndarray  # (T, N)

    def __post_init__(self):
        if self.prices.shape != (len(self.timestamps), len(self.codes)):
            raise DataError("price matrix does not match codes x timestamps")
        if len(set(self.codes)) != len(self.codes):
            raise DataError("duplicate codes in panel")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > np.timedelta64(0)):
            raise DataError("timestamps are not strictly increasing")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise DataError("prices must be positive and finite")


@dataclass(frozen=True)
class ReturnPanel:
    codes: list[str]
    observations: np.ndarray  # (T, N) log returns
    timestamps: np.ndarray
    days: np.ndarray
    day_boundaries: np.ndarray  # row indices where a new trading day starts

    @property
    def n_obs(self) -> int:
        return self.observations.shape[0]

    def column(self, code: str) -> np.ndarray:
        return self.observations[:, self.codes.index(code)]

    def trading_days(self) -> list:
        return sorted(set(self.days.tolist()))

    def subset(self, mask) -> ReturnPanel:
        mask = np.asarray(mask, dtype=bool)
        days = self.days[mask]
        starts = np.flatnonzero(np.r_[True, days[1:] != days[:-1]]) if days.size else np.array([], dtype=int)
        return ReturnPanel(self.codes, self.observations[mask], self.timestamps[mask], days, starts)


@dataclass(frozen=True)
class PeriodSpec:
    name: str
    start_date: dt.date
    end_date: dt.date

    def __post_init__(self):
        if self.start_date > self.end_date:
            raise DataError(f"period {self.name!r}: start after end")


@dataclass(frozen=True)
class SectorGrouping:
    entries: dict  # code -> (sector, group)

    def __post_init__(self):
        for code, (sector, group) in self.entries.items():
            if group not in GROUP_TAGS:
                raise DataError(f"unknown group tag {group!r} for code {code}")

    def group_of(self, code: str) -> str:
        try:
            return self.entries[code][1]
        except KeyError:
            raise DataError(f"code {code} missing from sector grouping") from None

    def sector_of(self, code: str) -> str:
        return self.entries[code][0]

    def check_covers(self, codes) -> None:
        missing = [c for c in codes if c not in self.entries]
        if missing:
            raise DataError(f"codes missing from sector grouping: {', '.join(missing)}")

    def members(self, group: str, codes=None) -> list[str]:
        pool = self.entries if codes is None else codes
        return [c for c in pool if self.entries[c][1] == group]


@dataclass(frozen=True)
class StatsRow:
    code: str
    mean: float
    sd: float
    skewness: float
    kurtosis: float
    jb_stat: float
    jb_pvalue: float
    ar1: float
    n_obs: int


# ---------------------------------------------------------------------------
# prices


def _read_long(path) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"code": str}, encoding="utf-8")
    expected = {"timestamp", "code", "close"}
    if not expected <= set(df.columns):
        raise DataError(f"long format needs columns timestamp,code,close; got {list(df.columns)}")
    df["timestamp"] = pd.to_datetime(df["timestamp"])
    close = pd.to_numeric(df["close"], errors="coerce")
    bad = ~(close > 0) | ~np.isfinite(close)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(f"non-positive or invalid close price at data row {row + 1} (line {row + 2})")
    dup = df.duplicated(["timestamp", "code"])
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise DataError(f"duplicate (timestamp, code) at data row {row + 1} (line {row + 2})")
    df["close"] = close
    return df.pivot(index="timestamp", columns="code", values="close")


def _read_wide(path) -> pd.DataFrame:
    with open(path, encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh))
    if not header or header[0] != "timestamp":
        raise DataError("wide format needs a leading timestamp column")
    if len(set(header)) != len(header):
        raise DataError("duplicate code columns in wide file")
    df = pd.read_csv(path, dtype={c: float for c in header[1:]}, encoding="utf-8")
    df["timestamp"] = pd.to_datetime(df["timestamp"])
    if df["timestamp"].duplicated().any():
        row = int(np.flatnonzero(df["timestamp"].duplicated().to_numpy())[0])
        raise DataError(f"duplicate timestamp at data row {row + 1} (line {row + 2})")
    values = df[header[1:]].to_numpy(dtype=float)
    bad = ~np.isnan(values) & ~(values > 0)
    bad |= np.isinf(values)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        raise DataError(f"non-positive or invalid close price at data row {row + 1} (line {row + 2}), code {header[col + 1]}")
    return df.set_index("timestamp")


def _fill_gaps(prices: np.ndarray, days: np.ndarray, codes, max_gap: int) -> np.ndarray:
    """Forward-fill missing cells within a day; runs longer than ``max_gap`` are rejected."""
    prices = prices.copy()
    starts = np.flatnonzero(np.r_[True, days[1:] != days[:-1]])
    ends = np.r_[starts[1:], len(days)]
    for j, code in enumerate(codes):
        col = prices[:, j]
        for s, e in zip(starts, ends):
            seg = col[s:e]
            miss = np.isnan(seg)
            if not miss.any():
                continue
            if miss[0]:
                raise DataError(f"code {code}: no price at the first minute of {days[s]}")
            run = 0
            for k in range(1, seg.size):
                if miss[k]:
                    run += 1
                    if run > max_gap:
                        raise DataError(f"code {code}: gap of more than {max_gap} minutes on {days[s]}")
                    seg[k] = seg[k - 1]
                else:
                    run = 0
    return prices


def load_price_panel(path, format: str = "long", max_gap: int = DEFAULT_MAX_GAP) -> PricePanel:
    """Read a long (timestamp,code,close) or wide (timestamp,<codes...>) CSV.

    The panel grid is the union of timestamps in the file. Short gaps inside a
    trading day are forward-filled from the previous minute.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"price file not found: {path}")
    if format == "long":
        wide = _read_long(path)
    elif format == "wide":
        wide = _read_wide(path)
    else:
        raise ValueError("format must be 'long' or 'wide'")
    wide = wide.sort_index()
    codes = sorted(str(c) for c in wide.columns)
    wide = wide[codes]
    ts = wide.index.to_numpy(dtype="datetime64[ns]")
    days = ts.astype("datetime64[D]")
    prices = _fill_gaps(wide.to_numpy(dtype=float), days, codes, max_gap)
    return PricePanel(codes, ts, days, prices)


def write_price_panel(panel: PricePanel, path) -> None:
    """Long-format CSV with round-trip float precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("timestamp,code,close\n")
        stamps = pd.DatetimeIndex(panel.timestamps).strftime("%Y-%m-%dT%H:%M")
        for t, stamp in enumerate(stamps):
            for j, code in enumerate(panel.codes):
                fh.write(f"{stamp},{code},{float(panel.prices[t, j])!r}\n")


def compute_log_returns(panel: PricePanel) -> ReturnPanel:
    """r_t = ln P_t - ln P_{t-1} inside each trading day; overnight moves are dropped."""
    days = panel.days
    starts = np.flatnonzero(np.r_[True, days[1:] != days[:-1]])
    sizes = np.diff(np.r_[starts, len(days)])
    if np.any(sizes < 2):
        bad = days[starts[np.argmax(sizes < 2)]]
        raise DataError(f"trading day {bad} has fewer than 2 observations")
    logp = np.log(panel.prices)
    diff = logp[1:] - logp[:-1]
    keep = days[1:] == days[:-1]
    obs = np.ascontiguousarray(diff[keep])
    out_days = days[1:][keep]
    out_ts = panel.timestamps[1:][keep]
    boundaries = np.flatnonzero(np.r_[True, out_days[1:] != out_days[:-1]])
    return ReturnPanel(list(panel.codes), obs, out_ts, out_days, boundaries)


# ---------------------------------------------------------------------------
# periods and grouping


def _as_date(value) -> dt.date:
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value))


def load_periods(path) -> list[PeriodSpec]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return parse_periods(raw)


def parse_periods(raw) -> list[PeriodSpec]:
    specs = [PeriodSpec(str(p["name"]), _as_date(p["start"]), _as_date(p["end"])) for p in raw]
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise DataError("period names must be unique")
    return specs


def default_periods() -> list[PeriodSpec]:
    raw = json.loads(resources.files("spillnet").joinpath("data/periods_2020.json").read_text(encoding="utf-8"))
    return parse_periods(raw)


def split_periods(returns: ReturnPanel, specs: list[PeriodSpec]) -> list[ReturnPanel]:
    """One panel per period holding exactly the trading days in [start, end]."""
    ordered = sorted(specs, key=lambda s: s.start_date)
    for a, b in zip(ordered, ordered[1:]):
        if b.start_date <= a.end_date:
            raise DataError(f"periods {a.name!r} and {b.name!r} overlap")
    out = []
    for spec in specs:
        lo = np.datetime64(spec.start_date, "D")
        hi = np.datetime64(spec.end_date, "D")
        mask = (returns.days >= lo) & (returns.days <= hi)
        if not mask.any():
            raise DataError(f"period {spec.name!r} contains no trading days")
        out.append(returns.subset(mask))
    return out


def parse_grouping(raw: dict) -> SectorGrouping:
    entries = {}
    for code, item in raw.items():
        if not isinstance(item, dict) or "group" not in item:
            raise DataError(f"grouping entry for {code} needs 'sector' and 'group'")
        entries[str(code)] = (str(item.get("sector", "")), str(item["group"]))
    return SectorGrouping(entries)


def load_grouping(path) -> SectorGrouping:
    with open(path, encoding="utf-8") as fh:
        return parse_grouping(json.load(fh))


def default_grouping() -> SectorGrouping:
    """The 102 SWS level-2 industry indices in four demand-oriented groups."""
    raw = json.loads(resources.files("spillnet").joinpath("data/sws_grouping.json").read_text(encoding="utf-8"))
    return parse_grouping(raw)


# ---------------------------------------------------------------------------
# descriptive statistics


def descriptive_stats(series, code: str = "") -> StatsRow:
    """Moments, Jarque-Bera test and lag-1 autocorrelation of one return column.

    Skewness and kurtosis are the standardized third and fourth central
    moments (normal kurtosis = 3); JB = n/6 (S^2 + (K-3)^2/4) against chi2(2).
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 8:
        raise DataError("descriptive statistics need at least 8 observations")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    if not m2 > 0 or np.all(x == x[0]):
        raise DataError("degenerate series: constant values")
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    skew = m3 / m2 ** 1.5
    kurt = m4 / (m2 * m2)
    jb = n / 6.0 * (skew * skew + (kurt - 3.0) ** 2 / 4.0)
    ar1 = float(np.dot(d[1:], d[:-1]) / np.dot(d, d))
    return StatsRow(
        code=code,
        mean=mean,
        sd=float(x.std(ddof=1)),
        skewness=skew,
        kurtosis=kurt,
        jb_stat=jb,
        jb_pvalue=float(stats.chi2.sf(jb, 2)),
        ar1=ar1,
        n_obs=n,
    )


def stats_table(returns: ReturnPanel) -> list[StatsRow]:
    return [descriptive_stats(returns.observations[:, j], code) for j, code in enumerate(returns.codes)]


def reconstruct_prices(returns: ReturnPanel, opening: np.ndarray) -> np.ndarray:
    """Within-day prices from returns and each day's opening prices (days x N)."""
    out = np.empty((returns.n_obs + len(returns.day_boundaries), len(returns.codes)))
    ends = np.r_[returns.day_boundaries[1:], returns.n_obs]
    row = 0
    for d, (s, e) in enumerate(zip(returns.day_boundaries, ends)):
        out[row] = opening[d]
        out[row + 1: row + 1 + (e - s)] = opening[d] * np.exp(np.cumsum(returns.observations[s:e], axis=0))
        row += e - s + 1
    return out
