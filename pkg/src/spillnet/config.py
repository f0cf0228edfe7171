"""Pipeline configuration with validated defaults."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from spillnet.bekk.estimate import FitOptions
from spillnet.errors import ConfigError

DEFAULT_SIGNIFICANCE = 0.10
DEFAULT_WBC_ALPHA = 0.5
DEFAULT_KSHELL_ALPHA = 1.0
DEFAULT_KSHELL_BETA = 1.0
DEFAULT_MAJOR_QUANTILE = 0.20
DEFAULT_DOT_QUANTILE = 0.05
DEFAULT_EMD_BINS = 20


@dataclass(frozen=True)
class PipelineConfig:
    """Inputs, model options and output location for a full run.

    ``grouping`` and ``periods`` may be None to use the bundled defaults.
    Relative paths in a config file resolve against the file's directory.
    """

    prices: str | None = None
    price_format: str = "long"
    max_gap: int = 5
    grouping: str | None = None
    periods: str | None = None
    significance: float = DEFAULT_SIGNIFICANCE
    wbc_alpha: float = DEFAULT_WBC_ALPHA
    kshell_alpha: float = DEFAULT_KSHELL_ALPHA
    kshell_beta: float = DEFAULT_KSHELL_BETA
    kshell_strength: str = "out"
    major_quantile: float = DEFAULT_MAJOR_QUANTILE
    dot_quantile: float = DEFAULT_DOT_QUANTILE
    emd_bins: int = DEFAULT_EMD_BINS
    emd_signed: bool = False
    test_style: str = "wald"
    restarts: int = 5
    gtol: float = 1e-5
    maxiter: int = 500
    min_obs: int = 200
    out_dir: str = "out"
    workers: int = 1
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.significance < 1.0:
            raise ConfigError(f"significance must lie in (0, 1), got {self.significance}")
        if not 0.0 < self.wbc_alpha <= 1.0:
            raise ConfigError(f"wbc_alpha must lie in (0, 1], got {self.wbc_alpha}")
        if not (self.kshell_alpha > 0 and self.kshell_beta > 0):
            raise ConfigError("k-shell exponents must be positive")
        if self.kshell_strength not in ("out", "total"):
            raise ConfigError("kshell_strength must be 'out' or 'total'")
        for name in ("major_quantile", "dot_quantile"):
            q = getattr(self, name)
            if not 0.0 < q <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {q}")
        if self.emd_bins < 1:
            raise ConfigError("emd_bins must be >= 1")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.price_format not in ("long", "wide"):
            raise ConfigError("price_format must be 'long' or 'wide'")
        if self.test_style not in ("wald", "lr"):
            raise ConfigError("test_style must be 'wald' or 'lr'")
        if self.max_gap < 0 or self.restarts < 1 or self.min_obs < 3:
            raise ConfigError("max_gap >= 0, restarts >= 1 and min_obs >= 3 are required")

    def fit_options(self) -> FitOptions:
        return FitOptions(restarts=self.restarts, gtol=self.gtol, maxiter=self.maxiter,
                          min_obs=self.min_obs, seed=self.seed, test_style=self.test_style,
                          level=self.significance)

    def replace(self, **changes) -> PipelineConfig:
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("prices", "grouping", "periods", "out_dir"):
        if raw.get(key) is not None and not Path(raw[key]).is_absolute():
            raw[key] = str(path.parent / raw[key])
    try:
        return PipelineConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
