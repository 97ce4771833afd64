"""Cyclic complex Jacobi eigensolver, pure-numpy reference path.

Same rotation sequence as the numba kernel; used when the env flag selects
the fallback or numba is unavailable.
"""

from __future__ import annotations

import numpy as np


def _offdiag_norm(h: np.ndarray) -> float:
    # summed entrywise (not total minus trace) to avoid cancellation
    off = np.abs(h) ** 2
    np.fill_diagonal(off, 0.0)
    return float(np.sqrt(off.sum()))


def jacobi_sweeps(h: np.ndarray, v: np.ndarray, max_sweeps: int, off_target: float) -> int:
    """Diagonalize Hermitian h in place, accumulating the unitary into v.

    Returns the number of sweeps used, or -1 if off_target was not reached
    within max_sweeps.
    """
    n = h.shape[0]
    if n < 2:
        h[0, 0] = h[0, 0].real
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
                # H <- J* H J with J e_p = c e_p - s conj(e) e_q, J e_q = s e_p + c conj(e) e_q
                hip = h[:, p].copy()
                hiq = h[:, q].copy()
                h[:, p] = c * hip - s * ec * hiq
                h[:, q] = s * hip + c * ec * hiq
                hpj = h[p, :].copy()
                hqj = h[q, :].copy()
                h[p, :] = c * hpj - s * e * hqj
                h[q, :] = s * hpj + c * e * hqj
                h[p, q] = 0.0
                h[q, p] = 0.0
                h[p, p] = h[p, p].real
                h[q, q] = h[q, q].real
                vip = v[:, p].copy()
                viq = v[:, q].copy()
                v[:, p] = c * vip - s * ec * viq
                v[:, q] = s * vip + c * ec * viq
    if _offdiag_norm(h) <= off_target:
        return max_sweeps
    return -1
