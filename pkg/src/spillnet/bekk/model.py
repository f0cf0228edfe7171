"""Bivariate BEKK(1,1) parameters, covariance filtering, likelihood and simulation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spillnet.bekk import kernels
from spillnet.errors import CovarianceRecursionError, DataError, NumericalError

PARAM_NAMES = (
    "mu_i", "mu_j",
    "phi_ii", "phi_ij", "phi_ji", "phi_jj",
    "c_ii", "c_ij", "c_jj",
    "a_ii", "a_ij", "a_ji", "a_jj",
    "b_ii", "b_ij", "b_ji", "b_jj",
)
N_PARAMS = len(PARAM_NAMES)
IDX = {name: k for k, name in enumerate(PARAM_NAMES)}

DEFAULT_BURN_IN = 500


@dataclass(frozen=True)
class BekkParams:
    """Mean equation ``r_t = mu + phi r_{t-1} + eps_t`` and variance equation
    ``H_t = C'C + A' eps_{t-1} eps_{t-1}' A + B' H_{t-1} B``.

    ``c_lower`` is lower triangular with a positive diagonal.
    """

    mu: np.ndarray
    phi: np.ndarray
    c_lower: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name, shape in (("mu", (2,)), ("phi", (2, 2)), ("c_lower", (2, 2)), ("a", (2, 2)), ("b", (2, 2))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        c = self.c_lower
        if c[0, 1] != 0.0:
            raise ValueError("C must be lower triangular")
        if not (c[0, 0] > 0 and c[1, 1] > 0):
            raise ValueError("C must have a strictly positive diagonal")

    @classmethod
    def from_vector(cls, theta) -> BekkParams:
        t = np.asarray(theta, dtype=float)
        if t.shape != (N_PARAMS,):
            raise ValueError(f"expected {N_PARAMS} parameters, got shape {t.shape}")
        return cls(
            mu=t[0:2],
            phi=t[2:6].reshape(2, 2),
            c_lower=np.array([[t[6], 0.0], [t[7], t[8]]]),
            a=t[9:13].reshape(2, 2),
            b=t[13:17].reshape(2, 2),
        )

    @classmethod
    def diagonal(cls, a: float, b: float, cov=None, mu=(0.0, 0.0), phi=None) -> BekkParams:
        """Diagonal BEKK with A = aI, B = bI and unconditional covariance ``cov``."""
        cov = np.eye(2) if cov is None else np.asarray(cov, dtype=float)
        scale = 1.0 - a * a - b * b
        if scale <= 0:
            raise ValueError("a^2 + b^2 must be < 1")
        return cls(
            mu=np.asarray(mu, dtype=float),
            phi=np.zeros((2, 2)) if phi is None else phi,
            c_lower=c_from_cc(scale * cov),
            a=a * np.eye(2),
            b=b * np.eye(2),
        )

    def to_vector(self) -> np.ndarray:
        c = self.c_lower
        return np.concatenate([
            self.mu, self.phi.ravel(), [c[0, 0], c[1, 0], c[1, 1]], self.a.ravel(), self.b.ravel()
        ])

    @property
    def cc(self) -> np.ndarray:
        return self.c_lower.T @ self.c_lower

    def unconditional_covariance(self) -> np.ndarray:
        """Solve vec(H) = vec(C'C) + (A (x) A + B (x) B)' vec(H)."""
        m = np.kron(self.a, self.a) + np.kron(self.b, self.b)
        vec = np.linalg.solve(np.eye(4) - m.T, self.cc.reshape(-1, order="F"))
        h = vec.reshape(2, 2, order="F")
        return 0.5 * (h + h.T)


def c_from_cc(m) -> np.ndarray:
    """Lower-triangular C with positive diagonal such that C'C = m."""
    m = np.asarray(m, dtype=float)
    c22 = np.sqrt(m[1, 1])
    c21 = m[0, 1] / c22
    c11 = np.sqrt(m[0, 0] - c21 * c21)
    if not (np.isfinite(c11) and c11 > 0 and c22 > 0):
        raise ValueError("matrix is not positive definite")
    return np.array([[c11, 0.0], [c21, c22]])


@dataclass(frozen=True)
class CovarianceSeries:
    """Filtered residuals and conditional covariances, one row per usable observation."""

    h: np.ndarray  # (n, 2, 2)
    residuals: np.ndarray  # (n, 2)

    def __len__(self) -> int:
        return self.residuals.shape[0]


def stationarity_check(params: BekkParams) -> tuple[bool, float]:
    """Covariance stationarity: spectral radius of A (x) A + B (x) B below one."""
    m = np.kron(params.a, params.a) + np.kron(params.b, params.b)
    radius = float(np.max(np.abs(np.linalg.eigvals(m))))
    return radius < 1.0, radius


def _as_returns(returns) -> np.ndarray:
    r = np.ascontiguousarray(returns, dtype=float)
    if r.ndim != 2 or r.shape[1] != 2:
        raise DataError(f"returns must be a T x 2 matrix, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise DataError("returns contain non-finite values")
    return r


def initial_covariance(returns) -> np.ndarray:
    """Starting value H_1: covariance of residuals from an OLS VAR(1) fit.

    Falls back to the plain sample covariance of the returns when the
    regression is rank deficient.
    """
    r = _as_returns(returns)
    y, x = r[1:], np.column_stack([np.ones(r.shape[0] - 1), r[:-1]])
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank == 3:
        resid = y - x @ coef
        h = np.cov(resid, rowvar=False)
    else:
        h = np.cov(r, rowvar=False)
    if np.linalg.eigvalsh(h)[0] <= 0:
        h = np.cov(r, rowvar=False)
    return h


def _h0_vec(h0) -> np.ndarray:
    h0 = np.asarray(h0, dtype=float)
    if h0.shape == (2, 2):
        return np.array([h0[0, 0], 0.5 * (h0[0, 1] + h0[1, 0]), h0[1, 1]])
    return np.ascontiguousarray(h0, dtype=float)


def conditional_covariances(params: BekkParams, returns, h0=None) -> CovarianceSeries:
    """Residuals and H_t for t = 2..T; H at the first residual is ``h0``
    (default :func:`initial_covariance`)."""
    r = _as_returns(returns)
    if r.shape[0] < 3:
        raise DataError("need at least 3 observations")
    h0 = initial_covariance(r) if h0 is None else h0
    e, hv = kernels.filter_covariances(params.to_vector(), r, _h0_vec(h0))
    h = np.empty((hv.shape[0], 2, 2))
    h[:, 0, 0] = hv[:, 0]
    h[:, 0, 1] = h[:, 1, 0] = hv[:, 1]
    h[:, 1, 1] = hv[:, 2]
    finite = np.all(np.isfinite(hv), axis=1)
    if not finite.all():
        t = int(np.argmin(finite))
        raise NumericalError(f"non-finite conditional covariance at t={t}")
    det = hv[:, 0] * hv[:, 2] - hv[:, 1] ** 2
    bad = (hv[:, 0] <= 0) | (det <= 0)
    if bad.any():
        raise CovarianceRecursionError(int(np.argmax(bad)))
    return CovarianceSeries(h=h, residuals=e)


def log_likelihood(params: BekkParams, returns, h0=None) -> float:
    """Gaussian log-likelihood: sum of -ln(2 pi) - ln|H_t|/2 - eps_t' H_t^-1 eps_t / 2."""
    r = _as_returns(returns)
    if r.shape[0] < 3:
        raise DataError("need at least 3 observations")
    h0 = initial_covariance(r) if h0 is None else h0
    value, _ = kernels.loglik_score(params.to_vector(), r, _h0_vec(h0), False)
    return float(value)


def simulate_pair(params: BekkParams, T: int, seed: int, burn_in: int = DEFAULT_BURN_IN) -> np.ndarray:
    """Draw a T x 2 return path with Gaussian innovations.

    The recursion starts from the unconditional covariance and a zero lagged
    return; the first ``burn_in`` draws are discarded.
    """
    if int(T) < 1:
        raise ValueError("T must be at least 1")
    ok, radius = stationarity_check(params)
    if not ok:
        raise ValueError(f"parameters are not covariance stationary (spectral radius {radius:.6g})")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((int(T) + burn_in, 2))
    out = kernels.simulate_path(params.to_vector(), z, _h0_vec(params.unconditional_covariance()))
    return np.ascontiguousarray(out[burn_in:])
