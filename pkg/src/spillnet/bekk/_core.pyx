# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled BEKK(1,1) recursions.

Parameter vector layout (17 entries)::

    mu_i, mu_j, phi_ii, phi_ij, phi_ji, phi_jj, c_ii, c_ij, c_jj,
    a_ii, a_ij, a_ji, a_jj, b_ii, b_ij, b_ji, b_jj

Symmetric 2x2 matrices are carried as (h11, h12, h22).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, isfinite

cnp.import_array()

from spillnet.errors import CovarianceRecursionError

DEF NP = 17
cdef double LOG_2PI = 1.8378770664093453


def loglik_score(double[::1] theta, double[:, ::1] r, double[::1] h0,
                 bint want_grad=True, double[:, ::1] scores=None):
    """Gaussian log-likelihood and its analytic gradient.

    Returns ``(loglik, grad)``; ``grad`` is None when ``want_grad`` is false.
    Per-observation scores are written into ``scores`` (n x 17) when given.
    Raises :class:`CovarianceRecursionError` when some H_t is not positive definite.
    """
    cdef Py_ssize_t T = r.shape[0]
    cdef Py_ssize_t n = T - 1
    cdef Py_ssize_t k, p
    cdef double mu0 = theta[0], mu1 = theta[1]
    cdef double f00 = theta[2], f01 = theta[3], f10 = theta[4], f11 = theta[5]
    cdef double c11 = theta[6], c21 = theta[7], c22 = theta[8]
    cdef double a00 = theta[9], a01 = theta[10], a10 = theta[11], a11 = theta[12]
    cdef double b00 = theta[13], b01 = theta[14], b10 = theta[15], b11 = theta[16]
    cdef double cc11 = c11 * c11 + c21 * c21
    cdef double cc12 = c21 * c22
    cdef double cc22 = c22 * c22
    cdef double h11 = h0[0], h12 = h0[1], h22 = h0[2]
    cdef double e0 = 0.0, e1 = 0.0, pe0 = 0.0, pe1 = 0.0
    cdef double v0, v1, y00, y01, y10, y11, det, i11, i12, i22, u0, u1
    cdef double w11, w12, w22, total = 0.0
    cdef double x11, x12, x22, z00, z01, z10, z11, dv0, dv1, s
    # derivative state: dH (NP x 3), previous-lag regressors for mean params
    cdef double dh[NP][3]
    cdef double nd[NP][3]
    cdef double de0[6]
    cdef double de1[6]
    cdef double pde0[6]
    cdef double pde1[6]
    cdef double g[NP]
    cdef bint have_scores = scores is not None

    for p in range(NP):
        g[p] = 0.0
        dh[p][0] = 0.0
        dh[p][1] = 0.0
        dh[p][2] = 0.0
    for p in range(6):
        pde0[p] = 0.0
        pde1[p] = 0.0

    for k in range(n):
        # residual of the VAR(1) mean equation
        e0 = r[k + 1, 0] - mu0 - f00 * r[k, 0] - f01 * r[k, 1]
        e1 = r[k + 1, 1] - mu1 - f10 * r[k, 0] - f11 * r[k, 1]
        if k > 0:
            v0 = a00 * pe0 + a10 * pe1
            v1 = a01 * pe0 + a11 * pe1
            # Y = H_{k-1} B
            y00 = h11 * b00 + h12 * b10
            y01 = h11 * b01 + h12 * b11
            y10 = h12 * b00 + h22 * b10
            y11 = h12 * b01 + h22 * b11
            if want_grad:
                for p in range(NP):
                    # B' dH_{k-1} B
                    x11 = dh[p][0]
                    x12 = dh[p][1]
                    x22 = dh[p][2]
                    z00 = x11 * b00 + x12 * b10
                    z01 = x11 * b01 + x12 * b11
                    z10 = x12 * b00 + x22 * b10
                    z11 = x12 * b01 + x22 * b11
                    nd[p][0] = b00 * z00 + b10 * z10
                    nd[p][1] = b00 * z01 + b10 * z11
                    nd[p][2] = b01 * z01 + b11 * z11
                for p in range(6):
                    dv0 = a00 * pde0[p] + a10 * pde1[p]
                    dv1 = a01 * pde0[p] + a11 * pde1[p]
                    nd[p][0] += 2.0 * v0 * dv0
                    nd[p][1] += v0 * dv1 + v1 * dv0
                    nd[p][2] += 2.0 * v1 * dv1
                nd[6][0] += 2.0 * c11
                nd[7][0] += 2.0 * c21
                nd[7][1] += c22
                nd[8][1] += c21
                nd[8][2] += 2.0 * c22
                # A entries: a_rs perturbs component s of v by e_r
                nd[9][0] += 2.0 * v0 * pe0
                nd[9][1] += v1 * pe0
                nd[10][1] += v0 * pe0
                nd[10][2] += 2.0 * v1 * pe0
                nd[11][0] += 2.0 * v0 * pe1
                nd[11][1] += v1 * pe1
                nd[12][1] += v0 * pe1
                nd[12][2] += 2.0 * v1 * pe1
                # B entries: b_rs contributes E_sr (H B) + transpose
                nd[13][0] += 2.0 * y00
                nd[13][1] += y01
                nd[14][1] += y00
                nd[14][2] += 2.0 * y01
                nd[15][0] += 2.0 * y10
                nd[15][1] += y11
                nd[16][1] += y10
                nd[16][2] += 2.0 * y11
                for p in range(NP):
                    dh[p][0] = nd[p][0]
                    dh[p][1] = nd[p][1]
                    dh[p][2] = nd[p][2]
            x11 = cc11 + v0 * v0 + b00 * y00 + b10 * y10
            x12 = cc12 + v0 * v1 + b00 * y01 + b10 * y11
            x22 = cc22 + v1 * v1 + b01 * y01 + b11 * y11
            h11 = x11
            h12 = x12
            h22 = x22
        det = h11 * h22 - h12 * h12
        if not (det > 0.0 and h11 > 0.0 and isfinite(det)):
            raise CovarianceRecursionError(k, "conditional covariance not positive definite at t=%d" % k)
        i11 = h22 / det
        i12 = -h12 / det
        i22 = h11 / det
        u0 = i11 * e0 + i12 * e1
        u1 = i12 * e0 + i22 * e1
        total += -LOG_2PI - 0.5 * log(det) - 0.5 * (e0 * u0 + e1 * u1)
        # d e_k / d theta for the mean parameters
        de0[0] = -1.0
        de1[0] = 0.0
        de0[1] = 0.0
        de1[1] = -1.0
        de0[2] = -r[k, 0]
        de1[2] = 0.0
        de0[3] = -r[k, 1]
        de1[3] = 0.0
        de0[4] = 0.0
        de1[4] = -r[k, 0]
        de0[5] = 0.0
        de1[5] = -r[k, 1]
        if want_grad:
            w11 = 0.5 * (u0 * u0 - i11)
            w12 = u0 * u1 - i12
            w22 = 0.5 * (u1 * u1 - i22)
            for p in range(NP):
                s = w11 * dh[p][0] + w12 * dh[p][1] + w22 * dh[p][2]
                if p < 6:
                    s -= u0 * de0[p] + u1 * de1[p]
                g[p] += s
                if have_scores:
                    scores[k, p] = s
        for p in range(6):
            pde0[p] = de0[p]
            pde1[p] = de1[p]
        pe0 = e0
        pe1 = e1

    if not isfinite(total):
        raise CovarianceRecursionError(n - 1, "log-likelihood is not finite")
    if not want_grad:
        return total, None
    grad = np.empty(NP, dtype=np.float64)
    cdef double[::1] gv = grad
    for p in range(NP):
        gv[p] = g[p]
    return total, grad


def filter_covariances(double[::1] theta, double[:, ::1] r, double[::1] h0):
    """Residuals (n x 2) and conditional covariances (n x 3) for n = T - 1."""
    cdef Py_ssize_t T = r.shape[0]
    cdef Py_ssize_t n = T - 1
    cdef Py_ssize_t k
    out_e = np.empty((n, 2), dtype=np.float64)
    out_h = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] ev = out_e
    cdef double[:, ::1] hv = out_h
    cdef double mu0 = theta[0], mu1 = theta[1]
    cdef double f00 = theta[2], f01 = theta[3], f10 = theta[4], f11 = theta[5]
    cdef double c11 = theta[6], c21 = theta[7], c22 = theta[8]
    cdef double a00 = theta[9], a01 = theta[10], a10 = theta[11], a11 = theta[12]
    cdef double b00 = theta[13], b01 = theta[14], b10 = theta[15], b11 = theta[16]
    cdef double h11 = h0[0], h12 = h0[1], h22 = h0[2]
    cdef double e0, e1, pe0 = 0.0, pe1 = 0.0, v0, v1, y00, y01, y10, y11
    cdef double x11, x12, x22
    for k in range(n):
        e0 = r[k + 1, 0] - mu0 - f00 * r[k, 0] - f01 * r[k, 1]
        e1 = r[k + 1, 1] - mu1 - f10 * r[k, 0] - f11 * r[k, 1]
        if k > 0:
            v0 = a00 * pe0 + a10 * pe1
            v1 = a01 * pe0 + a11 * pe1
            y00 = h11 * b00 + h12 * b10
            y01 = h11 * b01 + h12 * b11
            y10 = h12 * b00 + h22 * b10
            y11 = h12 * b01 + h22 * b11
            x11 = c11 * c11 + c21 * c21 + v0 * v0 + b00 * y00 + b10 * y10
            x12 = c21 * c22 + v0 * v1 + b00 * y01 + b10 * y11
            x22 = c22 * c22 + v1 * v1 + b01 * y01 + b11 * y11
            h11 = x11
            h12 = x12
            h22 = x22
        ev[k, 0] = e0
        ev[k, 1] = e1
        hv[k, 0] = h11
        hv[k, 1] = h12
        hv[k, 2] = h22
        pe0 = e0
        pe1 = e1
    return out_e, out_h


def simulate_path(double[::1] theta, double[:, ::1] z, double[::1] h0):
    """Generate returns from standard-normal draws ``z`` (T x 2).

    The first lagged return is zero and the first covariance is ``h0``;
    callers discard a burn-in.  eps_t = L_t z_t with L_t the lower Cholesky
    factor of H_t.
    """
    cdef Py_ssize_t T = z.shape[0]
    cdef Py_ssize_t k
    out = np.empty((T, 2), dtype=np.float64)
    cdef double[:, ::1] rv = out
    cdef double mu0 = theta[0], mu1 = theta[1]
    cdef double f00 = theta[2], f01 = theta[3], f10 = theta[4], f11 = theta[5]
    cdef double c11 = theta[6], c21 = theta[7], c22 = theta[8]
    cdef double a00 = theta[9], a01 = theta[10], a10 = theta[11], a11 = theta[12]
    cdef double b00 = theta[13], b01 = theta[14], b10 = theta[15], b11 = theta[16]
    cdef double h11 = h0[0], h12 = h0[1], h22 = h0[2]
    cdef double l11, l21, l22, e0, e1, pr0 = 0.0, pr1 = 0.0, r0, r1
    cdef double v0, v1, y00, y01, y10, y11, x11, x12, x22, q
    for k in range(T):
        if not (h11 > 0.0):
            raise CovarianceRecursionError(k, "conditional covariance not positive definite at t=%d" % k)
        l11 = sqrt(h11)
        l21 = h12 / l11
        q = h22 - l21 * l21
        if not (q > 0.0 and isfinite(q)):
            raise CovarianceRecursionError(k, "conditional covariance not positive definite at t=%d" % k)
        l22 = sqrt(q)
        e0 = l11 * z[k, 0]
        e1 = l21 * z[k, 0] + l22 * z[k, 1]
        r0 = mu0 + f00 * pr0 + f01 * pr1 + e0
        r1 = mu1 + f10 * pr0 + f11 * pr1 + e1
        rv[k, 0] = r0
        rv[k, 1] = r1
        v0 = a00 * e0 + a10 * e1
        v1 = a01 * e0 + a11 * e1
        y00 = h11 * b00 + h12 * b10
        y01 = h11 * b01 + h12 * b11
        y10 = h12 * b00 + h22 * b10
        y11 = h12 * b01 + h22 * b11
        x11 = c11 * c11 + c21 * c21 + v0 * v0 + b00 * y00 + b10 * y10
        x12 = c21 * c22 + v0 * v1 + b00 * y01 + b10 * y11
        x22 = c22 * c22 + v1 * v1 + b01 * y01 + b11 * y11
        h11 = x11
        h12 = x12
        h22 = x22
        pr0 = r0
        pr1 = r1
    return out
