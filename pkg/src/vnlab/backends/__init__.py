"""Kernel backend selection.

The Jacobi eigensolver is the hot kernel of the package. Two interchangeable
implementations exist: a numba-jitted one and a pure-numpy fallback. The env
var ``VNLAB_BACKEND`` forces the choice (``numba`` or ``numpy``); unset, the
jitted path is used when numba imports cleanly.
"""

from __future__ import annotations

import os

import numpy as np

BACKEND_ENV = "VNLAB_BACKEND"

try:
    from . import _jacobi_numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - env without numba
    _jacobi_numba = None
    _HAVE_NUMBA = False

from . import _jacobi_numpy


def active_backend() -> str:
    """Resolve the backend name from the environment."""
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice in ("numpy", "python"):
        return "numpy"
    if choice == "numba":
        if not _HAVE_NUMBA:
            raise ImportError("VNLAB_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if _HAVE_NUMBA else "numpy"


def run_jacobi(
    hermitian: np.ndarray, max_sweeps: int, off_target: float, backend: str | None = None
) -> tuple[np.ndarray, np.ndarray, int]:
    """Run cyclic Jacobi on a Hermitian matrix.

    Returns (unsorted eigenvalues, unitary with matching columns, sweeps);
    sweeps is -1 when the off-diagonal target was not reached.
    """
    name = backend or active_backend()
    h = np.array(hermitian, dtype=np.complex128, order="C", copy=True)
    v = np.eye(h.shape[0], dtype=np.complex128)
    if name == "numba":
        sweeps = _jacobi_numba.jacobi_sweeps(h, v, max_sweeps, off_target)
    else:
        sweeps = _jacobi_numpy.jacobi_sweeps(h, v, max_sweeps, off_target)
    return np.diag(h).real.copy(), v, int(sweeps)
