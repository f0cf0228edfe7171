"""Quasi-maximum-likelihood estimation of bivariate BEKK(1,1) models.

Estimation runs on per-column standardised returns; the optimum is mapped
back to the original units exactly (the model is closed under diagonal
rescaling), together with the log-likelihood Jacobian term and the parameter
covariance.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from spillnet.bekk import kernels
from spillnet.bekk.model import (
    IDX,
    N_PARAMS,
    BekkParams,
    _as_returns,
    _h0_vec,
    c_from_cc,
    initial_covariance,
)
from spillnet.errors import DataError, NumericalError

logger = logging.getLogger(__name__)

# parameters optimised on the log scale
_LOG_IDX = (IDX["c_ii"], IDX["c_jj"])
OFFDIAG_IDX = (IDX["a_ij"], IDX["a_ji"], IDX["b_ij"], IDX["b_ji"])


@dataclass(frozen=True)
class FitOptions:
    """Estimation controls.

    restarts
        Maximum number of starting points (the first is the deterministic
        diagonal warm start).
    agree
        Stop early once this many converged starts reach the same
        log-likelihood.
    gtol
        Convergence threshold on the max-norm of the gradient of the mean
        negative log-likelihood in the transformed parameter space.
    """

    restarts: int = 5
    agree: int = 2
    gtol: float = 1e-5
    maxiter: int = 500
    min_obs: int = 200
    seed: int = 0
    test_style: str = "wald"
    level: float = 0.10

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.test_style not in ("wald", "lr"):
            raise ValueError("test_style must be 'wald' or 'lr'")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")


@dataclass
class BekkFit:
    pair: tuple[str, str]
    params: BekkParams
    loglik: float
    vcov: np.ndarray
    converged: bool
    n_restarts_used: int
    gradient_norm: float
    n_obs: int
    h0: np.ndarray
    vcov_method: str = "hessian"
    vcov_near_singular: bool = False
    tests: object | None = None  # SpilloverTests, attached by fit_and_test
    restricted_logliks: dict = field(default_factory=dict)

    @property
    def theta(self) -> np.ndarray:
        return self.params.to_vector()


# --------------------------------------------------------------------------
# parameter transforms


def _to_eta(theta):
    eta = np.array(theta, dtype=float)
    for k in _LOG_IDX:
        eta[k] = math.log(eta[k])
    return eta


def _to_theta(eta):
    theta = np.array(eta, dtype=float)
    for k in _LOG_IDX:
        theta[k] = math.exp(theta[k])
    return theta


def _radius(theta) -> float:
    a = theta[9:13].reshape(2, 2)
    b = theta[13:17].reshape(2, 2)
    m = np.kron(a, a) + np.kron(b, b)
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def _scale_vector(s) -> np.ndarray:
    si, sj = s
    return np.array([
        si, sj,
        1.0, si / sj, sj / si, 1.0,
        si, si, sj,
        1.0, sj / si, si / sj, 1.0,
        1.0, sj / si, si / sj, 1.0,
    ])


def _normalize_signs(theta) -> np.ndarray:
    """A and -A (likewise B) are observationally equivalent; keep a_ii, b_ii >= 0."""
    theta = np.array(theta, dtype=float)
    if theta[IDX["a_ii"]] < 0:
        theta[9:13] *= -1.0
    if theta[IDX["b_ii"]] < 0:
        theta[13:17] *= -1.0
    return theta


# --------------------------------------------------------------------------
# optimiser


@dataclass
class _OptResult:
    theta: np.ndarray
    loglik: float
    grad_norm: float
    converged: bool
    iterations: int
    message: str


class _Objective:
    """Mean negative log-likelihood over the free coordinates of eta."""

    def __init__(self, r, h0, free, fixed_theta):
        self.r = r
        self.h0 = h0
        self.n = r.shape[0] - 1
        self.free = np.asarray(free)
        self.fixed_eta = _to_eta(fixed_theta)
        self.nfev = 0

    def full_eta(self, x):
        eta = self.fixed_eta.copy()
        eta[self.free] = x
        return eta

    def admissible(self, x) -> bool:
        theta = _to_theta(self.full_eta(x))
        return bool(np.all(np.isfinite(theta))) and _radius(theta) < 1.0

    def __call__(self, x):
        self.nfev += 1
        theta = _to_theta(self.full_eta(x))
        try:
            ll, g = kernels.loglik_score(theta, self.r, self.h0, True)
        except NumericalError:
            return math.inf, None
        # chain rule for the log-scaled C diagonal
        for k in _LOG_IDX:
            g[k] *= theta[k]
        return -ll / self.n, -g[self.free] / self.n


def _quasi_newton(obj: _Objective, x0, gtol: float, maxiter: int) -> tuple[np.ndarray, float, np.ndarray, bool, int, str]:
    """BFGS with Armijo backtracking; inadmissible or non-finite trial points
    are rejected by halving the step."""
    x = np.array(x0, dtype=float)
    f, g = obj(x)
    if not math.isfinite(f):
        return x, f, np.full_like(x, np.inf), False, 0, "infeasible start"
    dim = x.size
    hinv = np.eye(dim)
    scaled = False
    max_step = 1.0
    for it in range(maxiter):
        if np.max(np.abs(g)) < gtol:
            return x, f, g, True, it, "gradient tolerance reached"
        p = -hinv @ g
        slope = float(g @ p)
        if slope >= 0:
            hinv = np.eye(dim)
            scaled = False
            p = -g
            slope = float(g @ p)
        pn = float(np.linalg.norm(p))
        if pn > max_step:
            p *= max_step / pn
            slope *= max_step / pn
        t = 1.0
        accepted = False
        while t > 1e-12:
            xn = x + t * p
            if obj.admissible(xn):
                fn, gn = obj(xn)
                if math.isfinite(fn) and fn <= f + 1e-4 * t * slope:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            if scaled or not np.allclose(hinv, np.eye(dim)):
                hinv = np.eye(dim)
                scaled = False
                continue
            return x, f, g, False, it, "line search failed"
        s = xn - x
        y = gn - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            if not scaled:
                hinv = np.eye(dim) * (sy / float(y @ y))
                scaled = True
            rho = 1.0 / sy
            hy = hinv @ y
            hinv = (hinv - rho * (np.outer(s, hy) + np.outer(hy, s))
                    + (rho * rho * float(y @ hy) + rho) * np.outer(s, s))
        x, f, g = xn, fn, gn
    converged = bool(np.max(np.abs(g)) < gtol)
    return x, f, g, converged, maxiter, "iteration limit"


def _optimize(r, h0, theta0, free, gtol, maxiter) -> _OptResult:
    obj = _Objective(r, h0, free, theta0)
    x0 = _to_eta(theta0)[free]
    x, f, g, conv, it, msg = _quasi_newton(obj, x0, gtol, maxiter)
    theta = _to_theta(obj.full_eta(x))
    return _OptResult(theta, -f * obj.n, float(np.max(np.abs(g))), conv, it, msg)


# --------------------------------------------------------------------------
# starting values


def _var1_ols(r):
    y, x = r[1:], np.column_stack([np.ones(r.shape[0] - 1), r[:-1]])
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    return coef[0], coef[1:].T  # mu, phi (row = equation)


def _start_vector(r, h0, k: int, seed: int) -> np.ndarray:
    mu, phi = _var1_ols(r)
    if k == 0:
        a_d = np.array([math.sqrt(0.05)] * 2)
        b_d = np.array([math.sqrt(0.90)] * 2)
        off_a = off_b = np.zeros(2)
    else:
        rng = np.random.default_rng([seed, k])
        a_d = rng.uniform(0.15, 0.40, size=2)
        b_d = np.sqrt(np.clip(rng.uniform(0.80, 0.95, size=2), None, 0.97 - a_d ** 2))
        off_a = rng.normal(0.0, 0.03, size=2)
        off_b = rng.normal(0.0, 0.03, size=2)
    a = np.array([[a_d[0], off_a[0]], [off_a[1], a_d[1]]])
    b = np.array([[b_d[0], off_b[0]], [off_b[1], b_d[1]]])
    # intercept chosen so the implied unconditional covariance is roughly h0
    persistence = 1.0 - np.maximum(a_d ** 2 + b_d ** 2, 0.0)
    d = np.sqrt(persistence)
    cc = h0 * np.outer(d, d)
    c = c_from_cc(cc)
    theta = np.concatenate([mu, phi.ravel(), [c[0, 0], c[1, 0], c[1, 1]], a.ravel(), b.ravel()])
    if _radius(theta) >= 1.0:
        theta[9:17] *= 0.95
    return theta


# --------------------------------------------------------------------------
# covariance of the estimator


def _numerical_hessian(r, h0, theta) -> np.ndarray:
    """Central differences of the analytic gradient of the total log-likelihood."""
    hess = np.empty((N_PARAMS, N_PARAMS))
    for p in range(N_PARAMS):
        h = 1e-5 * max(1.0, abs(theta[p]))
        tp = theta.copy()
        tm = theta.copy()
        tp[p] += h
        tm[p] -= h
        _, gp = kernels.loglik_score(tp, r, h0, True)
        _, gm = kernels.loglik_score(tm, r, h0, True)
        hess[:, p] = (gp - gm) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def _parameter_covariance(r, h0, theta) -> tuple[np.ndarray, str, bool]:
    try:
        info = -_numerical_hessian(r, h0, theta)
    except NumericalError:
        info = None
    if info is not None and np.all(np.isfinite(info)):
        try:
            chol = np.linalg.cholesky(info)
            inv_chol = np.linalg.inv(chol)
            vcov = inv_chol.T @ inv_chol
            if np.linalg.cond(info) < 1e12:
                return 0.5 * (vcov + vcov.T), "hessian", False
        except np.linalg.LinAlgError:
            pass
    # outer product of per-observation scores
    n = r.shape[0] - 1
    scores = np.zeros((n, N_PARAMS))
    kernels.loglik_score(theta, r, h0, True, scores)
    opg = scores.T @ scores
    if np.linalg.cond(opg) < 1e12:
        vcov = np.linalg.inv(opg)
        return 0.5 * (vcov + vcov.T), "opg", False
    base = info if info is not None and np.all(np.isfinite(info)) else opg
    vcov = np.linalg.pinv(base, rcond=1e-12, hermitian=True)
    return 0.5 * (vcov + vcov.T), "pinv", True


# --------------------------------------------------------------------------
# public API


def _prepare(returns, opts: FitOptions):
    r = _as_returns(returns)
    if r.shape[0] < opts.min_obs:
        raise DataError(f"need at least {opts.min_obs} observations, got {r.shape[0]}")
    sd = r.std(axis=0, ddof=1)
    if np.any(~(sd > 0)):
        raise DataError("return column is constant")
    rs = np.ascontiguousarray(r / sd)
    h0 = initial_covariance(rs)
    return r, rs, sd, h0


def _multi_start(rs, h0v, h0, free, opts: FitOptions, fixed=None):
    """Run warm starts until ``opts.agree`` converged runs coincide."""
    best = None
    converged = []
    used = 0
    for k in range(opts.restarts):
        theta0 = _start_vector(rs, h0, k, opts.seed)
        if fixed is not None:
            theta0[fixed] = 0.0
            if _radius(theta0) >= 1.0:
                continue
        used += 1
        res = _optimize(rs, h0v, theta0, free, opts.gtol, opts.maxiter)
        logger.debug("start %d: loglik=%.6f conv=%s (%s)", k, res.loglik, res.converged, res.message)
        if res.converged:
            converged.append(res)
        if best is None or (res.converged, res.loglik) > (best.converged, best.loglik):
            best = res
        if len(converged) >= opts.agree:
            lls = sorted((c.loglik for c in converged), reverse=True)
            n = rs.shape[0] - 1
            if abs(lls[0] - lls[opts.agree - 1]) <= 1e-6 * n:
                break
    return best, used


def fit_pair(returns, opts: FitOptions | None = None, pair: tuple[str, str] = ("i", "j")) -> BekkFit:
    """Maximise the Gaussian quasi-likelihood of a bivariate BEKK(1,1).

    Non-convergence across all starts is reported through ``converged=False``
    rather than an exception.
    """
    opts = opts or FitOptions()
    r, rs, sd, h0 = _prepare(returns, opts)
    h0v = _h0_vec(h0)
    free = np.arange(N_PARAMS)
    best, used = _multi_start(rs, h0v, h0, free, opts)
    n = rs.shape[0] - 1
    theta_s = _normalize_signs(best.theta)
    try:
        vcov_s, method, near_singular = _parameter_covariance(rs, h0v, theta_s)
    except NumericalError:
        vcov_s, method, near_singular = np.full((N_PARAMS, N_PARAMS), np.nan), "failed", True
    g = _scale_vector(sd)
    theta = theta_s * g
    vcov = vcov_s * np.outer(g, g)
    loglik = best.loglik - n * math.log(sd[0] * sd[1])
    return BekkFit(
        pair=tuple(pair),
        params=BekkParams.from_vector(theta),
        loglik=float(loglik),
        vcov=vcov,
        converged=bool(best.converged),
        n_restarts_used=used,
        gradient_norm=best.grad_norm,
        n_obs=int(r.shape[0]),
        h0=h0 * np.outer(sd, sd),
        vcov_method=method,
        vcov_near_singular=near_singular,
    )


def fit_restricted(returns, zero_idx, opts: FitOptions | None = None, start: BekkFit | None = None) -> tuple[float, bool]:
    """Log-likelihood maximised with the parameters in ``zero_idx`` fixed at 0.

    Used by the likelihood-ratio variant of the spillover tests.
    """
    opts = opts or FitOptions()
    r, rs, sd, h0 = _prepare(returns, opts)
    h0v = _h0_vec(h0)
    zero_idx = np.asarray(zero_idx, dtype=int)
    free = np.setdiff1d(np.arange(N_PARAMS), zero_idx)
    n = rs.shape[0] - 1
    candidates = []
    if start is not None:
        theta0 = start.theta / _scale_vector(sd)
        theta0[zero_idx] = 0.0
        if _radius(theta0) < 1.0:
            candidates.append(_optimize(rs, h0v, theta0, free, opts.gtol, opts.maxiter))
    if not any(c.converged for c in candidates):
        best, _ = _multi_start(rs, h0v, h0, free, replace(opts, agree=1), fixed=zero_idx)
        if best is not None:
            candidates.append(best)
    if not candidates:
        return -math.inf, False
    best = max(candidates, key=lambda c: (c.converged, c.loglik))
    return float(best.loglik - n * math.log(sd[0] * sd[1])), bool(best.converged)
