import numpy as np
import pytest

from spillnet.bekk import _core_py, kernels
from spillnet.bekk.estimate import FitOptions, fit_pair
from spillnet.bekk.model import (
    IDX,
    N_PARAMS,
    BekkParams,
    conditional_covariances,
    initial_covariance,
    log_likelihood,
    simulate_pair,
    stationarity_check,
)
from spillnet.bekk.wald import fit_and_test, lr_spillover_tests, spillover_tests, wald_statistic
from spillnet.errors import CovarianceRecursionError, DataError


def _naive_loglik(params, r, h0):
    """Straight transcription of the Gaussian BEKK likelihood."""
    c = params.c_lower
    cc = c.T @ c
    h = np.array(h0, dtype=float)
    total = 0.0
    e_prev = None
    for t in range(1, r.shape[0]):
        e = r[t] - params.mu - params.phi @ r[t - 1]
        if e_prev is not None:
            h = cc + params.a.T @ np.outer(e_prev, e_prev) @ params.a + params.b.T @ h @ params.b
        total += -np.log(2 * np.pi) - 0.5 * np.log(np.linalg.det(h)) - 0.5 * e @ np.linalg.solve(h, e)
        e_prev = e
    return total


def test_params_vector_roundtrip(spill_params):
    theta = spill_params.to_vector()
    assert theta.shape == (N_PARAMS,)
    assert theta[IDX["a_ij"]] == 0.2
    assert theta[IDX["c_ij"]] == 0.05
    back = BekkParams.from_vector(theta)
    np.testing.assert_array_equal(back.to_vector(), theta)


def test_params_validation():
    with pytest.raises(ValueError):
        BekkParams.from_vector(np.zeros(5))
    theta = np.zeros(N_PARAMS)
    theta[IDX["c_ii"]] = -0.1
    theta[IDX["c_jj"]] = 0.1
    with pytest.raises(ValueError):
        BekkParams.from_vector(theta)


def test_unconditional_covariance_fixed_point(spill_params):
    h = spill_params.unconditional_covariance()
    p = spill_params
    again = p.cc + p.a.T @ h @ p.a + p.b.T @ h @ p.b
    np.testing.assert_allclose(again, h, rtol=1e-12)


def test_diagonal_constructor_hits_target_covariance():
    cov = np.array([[2.0, 0.5], [0.5, 1.0]])
    p = BekkParams.diagonal(0.3, 0.9, cov)
    np.testing.assert_allclose(p.unconditional_covariance(), cov, rtol=1e-12)


def test_stationarity_check():
    ok, radius = stationarity_check(BekkParams.diagonal(0.3, 0.9))
    assert ok and radius == pytest.approx(0.9)
    bad = BekkParams.diagonal(0.3, 0.9)
    bad = BekkParams(bad.mu, bad.phi, bad.c_lower, bad.a * 1.2, bad.b * 1.1)
    assert not stationarity_check(bad)[0]


def test_loglik_matches_naive(spill_params):
    r = simulate_pair(spill_params, 300, seed=1)
    h0 = initial_covariance(r)
    assert log_likelihood(spill_params, r, h0) == pytest.approx(_naive_loglik(spill_params, r, h0), rel=1e-10)


@pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernel not built")
def test_compiled_and_python_kernels_agree(spill_params, rng):
    from spillnet.bekk import _core

    r = simulate_pair(spill_params, 2000, seed=3)
    h0 = np.array([1.0, 0.1, 1.2])
    theta = spill_params.to_vector() + 0.01 * rng.standard_normal(N_PARAMS)
    theta[IDX["c_ii"]] = abs(theta[IDX["c_ii"]])
    ll_c, g_c = _core.loglik_score(theta, r, h0, True)
    ll_p, g_p = _core_py.loglik_score(theta, r, h0, True)
    assert ll_c == pytest.approx(ll_p, rel=1e-12)
    np.testing.assert_allclose(g_c, g_p, rtol=1e-8, atol=1e-8)
    z = rng.standard_normal((500, 2))
    np.testing.assert_allclose(_core.simulate_path(theta, z, h0), _core_py.simulate_path(theta, z, h0), rtol=1e-12)
    e_c, h_c = _core.filter_covariances(theta, r, h0)
    e_p, h_p = _core_py.filter_covariances(theta, r, h0)
    np.testing.assert_allclose(h_c, h_p, rtol=1e-12)


def test_analytic_gradient_matches_finite_differences(spill_params):
    r = simulate_pair(spill_params, 400, seed=4)
    h0 = np.array([1.0, 0.1, 1.0])
    theta = spill_params.to_vector()
    _, grad = kernels.loglik_score(theta, r, h0, True)
    for k in range(N_PARAMS):
        step = 1e-6
        up, down = theta.copy(), theta.copy()
        up[k] += step
        down[k] -= step
        fd = (kernels.loglik_score(up, r, h0, False)[0] - kernels.loglik_score(down, r, h0, False)[0]) / (2 * step)
        assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-4)


def test_conditional_covariances_positive_definite(spill_params):
    r = simulate_pair(spill_params, 1000, seed=5)
    series = conditional_covariances(spill_params, r)
    assert len(series) == r.shape[0] - 1
    for h in series.h[::50]:
        np.linalg.cholesky(h)


def test_recursion_error_when_definiteness_lost():
    theta = BekkParams.diagonal(0.3, 0.9).to_vector()
    r = np.array([[0.0, 0.0], [1.0, 1.0], [0.5, -0.2], [0.1, 0.1]])
    with pytest.raises(CovarianceRecursionError):
        conditional_covariances(BekkParams.from_vector(theta), r, h0=np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_simulate_pair_reproducible_and_validated(spill_params):
    a = simulate_pair(spill_params, 100, seed=9)
    b = simulate_pair(spill_params, 100, seed=9)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (100, 2)
    with pytest.raises(ValueError):
        simulate_pair(spill_params, 0, seed=1)


def test_wald_statistic_basics():
    theta = np.zeros(N_PARAMS)
    assert wald_statistic(theta, np.eye(N_PARAMS), [10, 11]) == (0.0, False)
    theta[10] = 2.0
    stat, singular = wald_statistic(theta, np.eye(N_PARAMS) * 4.0, [10, 11])
    assert stat == pytest.approx(1.0) and not singular
    stat, singular = wald_statistic(theta, np.zeros((N_PARAMS, N_PARAMS)), [10, 11])
    assert singular


def test_fit_recovers_spillover(spill_params):
    r = simulate_pair(spill_params, 6000, seed=11)
    fit = fit_and_test(r, FitOptions(seed=1), ("x", "y"))
    assert fit.converged
    assert abs(fit.params.a[0, 1] - 0.2) < 0.08
    assert fit.tests.dir_ij.p_value < 0.10
    assert fit.tests.joint.df == 4 and fit.tests.dir_ij.df == 2
    # vcov is symmetric positive definite
    np.linalg.cholesky(fit.vcov)
    np.testing.assert_allclose(fit.vcov, fit.vcov.T)


def test_lr_tests_agree_in_direction(spill_params):
    r = simulate_pair(spill_params, 4000, seed=12)
    fit = fit_pair(r, FitOptions(seed=2))
    wald = spillover_tests(fit)
    lr = lr_spillover_tests(fit, r, FitOptions(seed=2, test_style="lr"))
    assert lr.style == "lr"
    assert lr.dir_ij.statistic > 0
    assert (lr.dir_ij.p_value < 0.10) == (wald.dir_ij.p_value < 0.10)


def test_fit_rejects_short_or_constant_series():
    with pytest.raises(DataError):
        fit_pair(np.zeros((50, 2)) + 1e-3, FitOptions())
    r = np.random.default_rng(0).standard_normal((500, 2))
    r[:, 1] = 0.25
    with pytest.raises(DataError):
        fit_pair(r, FitOptions())


def test_fit_is_scale_equivariant(spill_params):
    r = simulate_pair(spill_params, 3000, seed=13)
    f1 = fit_pair(r, FitOptions(seed=0))
    f2 = fit_pair(r * 1e-3, FitOptions(seed=0))
    np.testing.assert_allclose(f1.params.a, f2.params.a, atol=1e-4)
    np.testing.assert_allclose(f1.params.b, f2.params.b, atol=1e-4)
    # each Gaussian term shifts by -ln|c^2 I| = 2 ln(1000)
    assert f2.loglik - f1.loglik == pytest.approx(2 * np.log(1000.0) * (r.shape[0] - 1), rel=1e-6)
