"""Joint and directional volatility-spillover tests on a fitted pair."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from spillnet.bekk.estimate import BekkFit, FitOptions, fit_restricted
from spillnet.bekk.model import IDX

JOINT_IDX = (IDX["a_ij"], IDX["a_ji"], IDX["b_ij"], IDX["b_ji"])
DIR_IJ_IDX = (IDX["a_ij"], IDX["b_ij"])
DIR_JI_IDX = (IDX["a_ji"], IDX["b_ji"])

KINDS = {
    "joint": JOINT_IDX,
    "directional_i_to_j": DIR_IJ_IDX,
    "directional_j_to_i": DIR_JI_IDX,
}


@dataclass(frozen=True)
class TestResult:
    kind: str
    statistic: float
    df: int
    p_value: float
    level: float = 0.10
    singular: bool = False

    @property
    def rejected(self) -> bool:
        return self.p_value < self.level

    @property
    def rejected_at_10pct(self) -> bool:
        return self.p_value < 0.10


@dataclass(frozen=True)
class SpilloverTests:
    joint: TestResult
    dir_ij: TestResult
    dir_ji: TestResult
    style: str = "wald"

    def __iter__(self):
        return iter((self.joint, self.dir_ij, self.dir_ji))


def wald_statistic(theta, vcov, idx) -> tuple[float, bool]:
    """theta_R' (R V R')^{-1} theta_R over the coordinates ``idx``.

    Returns ``(statistic, singular)``; a singular restriction covariance
    yields ``(0.0, True)``.
    """
    idx = list(idx)
    est = np.asarray(theta, dtype=float)[idx]
    if not np.any(est):
        return 0.0, False
    v = np.asarray(vcov, dtype=float)[np.ix_(idx, idx)]
    if not np.all(np.isfinite(v)):
        return 0.0, True
    try:
        chol = np.linalg.cholesky(0.5 * (v + v.T))
    except np.linalg.LinAlgError:
        return 0.0, True
    if np.linalg.cond(v) > 1e14:
        return 0.0, True
    z = np.linalg.solve(chol, est)
    return float(z @ z), False


def _result(kind, stat, df, level, singular=False) -> TestResult:
    if singular:
        return TestResult(kind, 0.0, df, 1.0, level, True)
    stat = max(float(stat), 0.0)
    return TestResult(kind, stat, df, float(stats.chi2.sf(stat, df)), level, False)


def spillover_tests(fit: BekkFit, level: float = 0.10) -> SpilloverTests:
    """Wald tests of a_ij = a_ji = b_ij = b_ji = 0 (df 4) and of each direction (df 2)."""
    if not fit.converged:
        raise ValueError("spillover tests need a converged fit")
    theta = fit.theta
    out = {}
    for kind, idx in KINDS.items():
        stat, singular = wald_statistic(theta, fit.vcov, idx)
        out[kind] = _result(kind, stat, len(idx), level, singular)
    return SpilloverTests(out["joint"], out["directional_i_to_j"], out["directional_j_to_i"], "wald")


def lr_spillover_tests(fit: BekkFit, returns, opts: FitOptions | None = None) -> SpilloverTests:
    """Likelihood-ratio versions: refit under each zero restriction."""
    opts = opts or FitOptions(test_style="lr")
    if not fit.converged:
        raise ValueError("spillover tests need a converged fit")
    out = {}
    for kind, idx in KINDS.items():
        ll_r, ok = fit_restricted(returns, idx, opts, start=fit)
        fit.restricted_logliks[kind] = ll_r
        if not ok or not np.isfinite(ll_r):
            out[kind] = _result(kind, 0.0, len(idx), opts.level, singular=True)
        else:
            out[kind] = _result(kind, 2.0 * (fit.loglik - ll_r), len(idx), opts.level)
    return SpilloverTests(out["joint"], out["directional_i_to_j"], out["directional_j_to_i"], "lr")


def fit_and_test(returns, opts: FitOptions | None = None, pair=("i", "j")) -> BekkFit:
    """Fit a pair and attach its spillover tests (None when not converged)."""
    from spillnet.bekk.estimate import fit_pair

    opts = opts or FitOptions()
    fit = fit_pair(returns, opts, pair)
    if fit.converged:
        if opts.test_style == "lr":
            fit.tests = lr_spillover_tests(fit, returns, opts)
        else:
            fit.tests = spillover_tests(fit, opts.level)
    return fit
