"""Cyclic complex Jacobi eigensolver, numba-jitted hot path."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _offdiag_norm(h):
    n = h.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += abs(h[i, j]) ** 2
    return np.sqrt(acc)


@njit(cache=True)
def jacobi_sweeps(h, v, max_sweeps, off_target):
    n = h.shape[0]
    if n < 2:
        h[0, 0] = complex(h[0, 0].real, 0.0)
        return 0
    skip = off_target / (10.0 * n)
    for sweep in range(max_sweeps):
        if _offdiag_norm(h) <= off_target:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = h[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                hpp = h[p, p].real
                hqq = h[q, q].real
                e = apq / r
                tau = (hqq - hpp) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ec = np.conj(e)
                for i in range(n):
                    hip = h[i, p]
                    hiq = h[i, q]
                    h[i, p] = c * hip - s * ec * hiq
                    h[i, q] = s * hip + c * ec * hiq
                for j in range(n):
                    hpj = h[p, j]
                    hqj = h[q, j]
                    h[p, j] = c * hpj - s * e * hqj
                    h[q, j] = s * hpj + c * e * hqj
                h[p, q] = 0.0
                h[q, p] = 0.0
                h[p, p] = complex(h[p, p].real, 0.0)
                h[q, q] = complex(h[q, q].real, 0.0)
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - s * ec * viq
                    v[i, q] = s * vip + c * ec * viq
    if _offdiag_norm(h) <= off_target:
        return max_sweeps
    return -1
