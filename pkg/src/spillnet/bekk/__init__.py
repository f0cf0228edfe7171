"""Bivariate GARCH-BEKK(1,1) estimation and spillover testing."""
from spillnet.bekk.estimate import BekkFit, FitOptions, fit_pair, fit_restricted
from spillnet.bekk.kernels import BACKEND
from spillnet.bekk.model import (
    IDX,
    N_PARAMS,
    PARAM_NAMES,
    BekkParams,
    CovarianceSeries,
    conditional_covariances,
    initial_covariance,
    log_likelihood,
    simulate_pair,
    stationarity_check,
)
from spillnet.bekk.wald import (
    SpilloverTests,
    TestResult,
    fit_and_test,
    lr_spillover_tests,
    spillover_tests,
    wald_statistic,
)

__all__ = [
    "BACKEND", "BekkFit", "BekkParams", "CovarianceSeries", "FitOptions", "IDX", "N_PARAMS",
    "PARAM_NAMES", "SpilloverTests", "TestResult", "conditional_covariances", "fit_and_test",
    "fit_pair", "fit_restricted", "initial_covariance", "log_likelihood", "lr_spillover_tests",
    "simulate_pair", "spillover_tests", "stationarity_check", "wald_statistic",
]
