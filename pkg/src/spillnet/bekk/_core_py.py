"""Pure-Python BEKK(1,1) recursions.

Same contract as the compiled ``_core`` extension. The derivative state is
vectorised across the 17 parameters with numpy; the time loop stays in Python,
so this path is roughly two orders of magnitude slower.
"""
from __future__ import annotations

import math

import numpy as np

from spillnet.errors import CovarianceRecursionError

NPARAM = 17
LOG_2PI = math.log(2.0 * math.pi)

# direct-term selectors for the A and B blocks: (row r, column s) of each entry
_AB_RS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _unpack(theta):
    t = [float(x) for x in theta]
    return t[0:2], t[2:6], t[6:9], t[9:13], t[13:17]


def loglik_score(theta, r, h0, want_grad=True, scores=None):
    (mu0, mu1), (f00, f01, f10, f11), (c11, c21, c22), (a00, a01, a10, a11), (b00, b01, b10, b11) = _unpack(theta)
    r = np.asarray(r, dtype=float)
    n = r.shape[0] - 1
    cc11, cc12, cc22 = c11 * c11 + c21 * c21, c21 * c22, c22 * c22
    h11, h12, h22 = (float(x) for x in h0)
    e = r[1:] - np.array([mu0, mu1]) - r[:-1] @ np.array([[f00, f10], [f01, f11]])

    d11 = np.zeros(NPARAM)
    d12 = np.zeros(NPARAM)
    d22 = np.zeros(NPARAM)
    grad = np.zeros(NPARAM)
    total = 0.0
    pe0 = pe1 = 0.0
    pde0 = np.zeros(6)
    pde1 = np.zeros(6)
    for k in range(n):
        e0, e1 = e[k, 0], e[k, 1]
        if k > 0:
            v0 = a00 * pe0 + a10 * pe1
            v1 = a01 * pe0 + a11 * pe1
            y00 = h11 * b00 + h12 * b10
            y01 = h11 * b01 + h12 * b11
            y10 = h12 * b00 + h22 * b10
            y11 = h12 * b01 + h22 * b11
            if want_grad:
                z00 = d11 * b00 + d12 * b10
                z01 = d11 * b01 + d12 * b11
                z10 = d12 * b00 + d22 * b10
                z11 = d12 * b01 + d22 * b11
                n11 = b00 * z00 + b10 * z10
                n12 = b00 * z01 + b10 * z11
                n22 = b01 * z01 + b11 * z11
                dv0 = a00 * pde0 + a10 * pde1
                dv1 = a01 * pde0 + a11 * pde1
                n11[:6] += 2.0 * v0 * dv0
                n12[:6] += v0 * dv1 + v1 * dv0
                n22[:6] += 2.0 * v1 * dv1
                n11[6] += 2.0 * c11
                n11[7] += 2.0 * c21
                n12[7] += c22
                n12[8] += c21
                n22[8] += 2.0 * c22
                pe = (pe0, pe1)
                hb = ((y00, y01), (y10, y11))
                for idx, (rr, ss) in enumerate(_AB_RS):
                    er = pe[rr]
                    if ss == 0:
                        n11[9 + idx] += 2.0 * v0 * er
                        n12[9 + idx] += v1 * er
                    else:
                        n12[9 + idx] += v0 * er
                        n22[9 + idx] += 2.0 * v1 * er
                    yr0, yr1 = hb[rr]
                    if ss == 0:
                        n11[13 + idx] += 2.0 * yr0
                        n12[13 + idx] += yr1
                    else:
                        n12[13 + idx] += yr0
                        n22[13 + idx] += 2.0 * yr1
                d11, d12, d22 = n11, n12, n22
            h11 = cc11 + v0 * v0 + b00 * y00 + b10 * y10
            h12 = cc12 + v0 * v1 + b00 * y01 + b10 * y11
            h22 = cc22 + v1 * v1 + b01 * y01 + b11 * y11
        det = h11 * h22 - h12 * h12
        if not (det > 0.0 and h11 > 0.0 and math.isfinite(det)):
            raise CovarianceRecursionError(k)
        i11, i12, i22 = h22 / det, -h12 / det, h11 / det
        u0 = i11 * e0 + i12 * e1
        u1 = i12 * e0 + i22 * e1
        total += -LOG_2PI - 0.5 * math.log(det) - 0.5 * (e0 * u0 + e1 * u1)
        x0, x1 = r[k, 0], r[k, 1]
        de0 = np.array([-1.0, 0.0, -x0, -x1, 0.0, 0.0])
        de1 = np.array([0.0, -1.0, 0.0, 0.0, -x0, -x1])
        if want_grad:
            s = 0.5 * (u0 * u0 - i11) * d11 + (u0 * u1 - i12) * d12 + 0.5 * (u1 * u1 - i22) * d22
            s[:6] -= u0 * de0 + u1 * de1
            grad += s
            if scores is not None:
                scores[k, :] = s
        pde0, pde1 = de0, de1
        pe0, pe1 = e0, e1
    if not math.isfinite(total):
        raise CovarianceRecursionError(n - 1, "log-likelihood is not finite")
    return total, (grad if want_grad else None)


def filter_covariances(theta, r, h0):
    (mu0, mu1), (f00, f01, f10, f11), (c11, c21, c22), (a00, a01, a10, a11), (b00, b01, b10, b11) = _unpack(theta)
    r = np.asarray(r, dtype=float)
    n = r.shape[0] - 1
    e = r[1:] - np.array([mu0, mu1]) - r[:-1] @ np.array([[f00, f10], [f01, f11]])
    out_h = np.empty((n, 3))
    h11, h12, h22 = (float(x) for x in h0)
    for k in range(n):
        if k > 0:
            pe0, pe1 = e[k - 1]
            v0 = a00 * pe0 + a10 * pe1
            v1 = a01 * pe0 + a11 * pe1
            y00 = h11 * b00 + h12 * b10
            y01 = h11 * b01 + h12 * b11
            y10 = h12 * b00 + h22 * b10
            y11 = h12 * b01 + h22 * b11
            h11, h12, h22 = (
                c11 * c11 + c21 * c21 + v0 * v0 + b00 * y00 + b10 * y10,
                c21 * c22 + v0 * v1 + b00 * y01 + b10 * y11,
                c22 * c22 + v1 * v1 + b01 * y01 + b11 * y11,
            )
        out_h[k] = (h11, h12, h22)
    return np.ascontiguousarray(e), out_h


def simulate_path(theta, z, h0):
    (mu0, mu1), (f00, f01, f10, f11), (c11, c21, c22), (a00, a01, a10, a11), (b00, b01, b10, b11) = _unpack(theta)
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    h11, h12, h22 = (float(x) for x in h0)
    pr0 = pr1 = 0.0
    for k in range(z.shape[0]):
        if not h11 > 0.0:
            raise CovarianceRecursionError(k)
        l11 = math.sqrt(h11)
        l21 = h12 / l11
        q = h22 - l21 * l21
        if not (q > 0.0 and math.isfinite(q)):
            raise CovarianceRecursionError(k)
        l22 = math.sqrt(q)
        e0 = l11 * z[k, 0]
        e1 = l21 * z[k, 0] + l22 * z[k, 1]
        r0 = mu0 + f00 * pr0 + f01 * pr1 + e0
        r1 = mu1 + f10 * pr0 + f11 * pr1 + e1
        out[k] = (r0, r1)
        v0 = a00 * e0 + a10 * e1
        v1 = a01 * e0 + a11 * e1
        y00 = h11 * b00 + h12 * b10
        y01 = h11 * b01 + h12 * b11
        y10 = h12 * b00 + h22 * b10
        y11 = h12 * b01 + h22 * b11
        h11, h12, h22 = (
            c11 * c11 + c21 * c21 + v0 * v0 + b00 * y00 + b10 * y10,
            c21 * c22 + v0 * v1 + b00 * y01 + b10 * y11,
            c22 * c22 + v1 * v1 + b01 * y01 + b11 * y11,
        )
        pr0, pr1 = r0, r1
    return out
