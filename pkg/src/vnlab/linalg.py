"""Dense complex linear algebra: Hermitian/skew-Hermitian eigendecomposition
via cyclic Jacobi, spectral functional calculus, unitary exponentials,
resolvents, norms, and nullspaces of maps on matrix space.

Matrices are plain complex128 numpy arrays. Skew-Hermitian input A is
diagonalized through the Hermitian form -iA; the stored real values w then
satisfy A v = i w v.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .backends import run_jacobi
from .config import DEFAULT_TOL, Tolerances
from .errors import DomainError, NoConvergence, NotNormal, SpectrumHit

HERMITIAN = "hermitian"
SKEW = "skew_hermitian"


def as_matrix(a: np.ndarray) -> np.ndarray:
    """Validate and convert to a square complex128 array with finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def hs_inner_real(a: np.ndarray, b: np.ndarray) -> float:
    """Re Tr(a* b), the real inner product used for Lie-closure orthonormalization."""
    return float(np.real(np.vdot(a, b)))


def hermitian_defect(a: np.ndarray) -> float:
    return frobenius(a - a.conj().T)


def skew_defect(a: np.ndarray) -> float:
    return frobenius(a + a.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending reals) and orthonormal eigenvectors of a normal matrix.

    For kind == "skew_hermitian" the stored reals w are the rotation rates:
    the matrix has eigenvalue i*w on the matching column.
    """

    eigenvalues: np.ndarray
    unitary: np.ndarray
    kind: str = HERMITIAN

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def matrix(self) -> np.ndarray:
        """Reconstruct the decomposed matrix."""
        lam = self.eigenvalues.astype(np.complex128)
        if self.kind == SKEW:
            lam = 1j * lam
        return (self.unitary * lam) @ self.unitary.conj().T


def eig_hermitian(
    a: np.ndarray,
    kind: str = HERMITIAN,
    tol: Tolerances = DEFAULT_TOL,
    backend: str | None = None,
) -> SpectralDecomposition:
    """Diagonalize a (skew-)Hermitian matrix by cyclic Jacobi rotations.

    Raises NotNormal when the symmetry defect exceeds tolerance and
    NoConvergence when the sweep cap is hit before the off-diagonal target.
    """
    a = as_matrix(a)
    scale = max(1.0, frobenius(a))
    if kind == HERMITIAN:
        if hermitian_defect(a) > tol.hermitian_check * scale:
            raise NotNormal("matrix is not Hermitian to tolerance")
        h = (a + a.conj().T) / 2.0
    elif kind == SKEW:
        if skew_defect(a) > tol.hermitian_check * scale:
            raise NotNormal("matrix is not skew-Hermitian to tolerance")
        h = -1j * (a - a.conj().T) / 2.0
    else:
        raise ValueError(f"unknown kind {kind!r}")
    off_target = tol.jacobi_offdiag_rel * max(frobenius(h), np.finfo(float).tiny)
    w, v, sweeps = run_jacobi(h, tol.jacobi_max_sweeps, off_target, backend=backend)
    if sweeps < 0:
        raise NoConvergence(
            f"Jacobi did not converge in {tol.jacobi_max_sweeps} sweeps (dim {h.shape[0]})"
        )
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(eigenvalues=w[order], unitary=v[:, order], kind=kind)


def apply_spectral_function(
    dec: SpectralDecomposition, f: Callable[[np.ndarray], np.ndarray]
) -> np.ndarray:
    """Assemble U diag(f(w)) U* from a decomposition.

    f receives the stored real values (rotation rates for skew input) and may
    return complex values. DomainError if f is undefined or non-finite there.
    """
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            fw = np.asarray(f(dec.eigenvalues), dtype=np.complex128)
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        raise DomainError(f"function undefined on the spectrum: {exc}") from exc
    if fw.shape != dec.eigenvalues.shape:
        fw = np.broadcast_to(fw, dec.eigenvalues.shape).astype(np.complex128)
    if not np.all(np.isfinite(fw)):
        raise DomainError("function value non-finite at some eigenvalue")
    return (dec.unitary * fw) @ dec.unitary.conj().T


def expm_skew(
    a: np.ndarray, tol: Tolerances = DEFAULT_TOL, backend: str | None = None
) -> np.ndarray:
    """Unitary exponential of a skew-Hermitian matrix."""
    dec = eig_hermitian(a, kind=SKEW, tol=tol, backend=backend)
    return apply_spectral_function(dec, lambda w: np.exp(1j * w))


def _normal_eigendecomposition(
    a: np.ndarray, tol: Tolerances
) -> tuple[np.ndarray, np.ndarray]:
    """Complex eigenvalues and eigenvectors of a (skew-)Hermitian matrix."""
    a = as_matrix(a)
    scale = max(1.0, frobenius(a))
    if hermitian_defect(a) <= tol.hermitian_check * scale:
        dec = eig_hermitian(a, kind=HERMITIAN, tol=tol)
        return dec.eigenvalues.astype(np.complex128), dec.unitary
    if skew_defect(a) <= tol.hermitian_check * scale:
        dec = eig_hermitian(a, kind=SKEW, tol=tol)
        return 1j * dec.eigenvalues.astype(np.complex128), dec.unitary
    raise NotNormal("resolvent requires a Hermitian or skew-Hermitian matrix")


def resolvent(a: np.ndarray, z: complex, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """(a - z I)^{-1} through the spectral decomposition.

    Raises SpectrumHit when z is numerically an eigenvalue.
    """
    lam, u = _normal_eigendecomposition(a, tol)
    gap = np.min(np.abs(lam - z)) if lam.size else np.inf
    hit = tol.spectrum_hit * max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    if gap <= hit:
        raise SpectrumHit(f"z={z} is within {gap:.3e} of the spectrum")
    return (u * (1.0 / (lam - z))) @ u.conj().T


def op_norm(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest singular value, via the eigendecomposition of a* a."""
    a = as_matrix(a)
    if frobenius(a) == 0.0:
        return 0.0
    gram = a.conj().T @ a
    dec = eig_hermitian(gram, kind=HERMITIAN, tol=tol)
    return float(np.sqrt(max(float(dec.eigenvalues[-1]), 0.0)))


def nullspace_basis(
    lmap: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) basis of {X : L(X) = 0}.

    lmap has shape (rows, d*d) and acts on row-major vectorized d x d
    matrices; rows may stack several constraints. Each returned X satisfies
    ||lmap vec(X)|| <= nullspace tolerance.
    """
    lmap = np.asarray(lmap, dtype=np.complex128)
    if lmap.ndim != 2:
        raise ValueError("lmap must be a 2-d array")
    d = int(round(np.sqrt(lmap.shape[1])))
    if d * d != lmap.shape[1]:
        raise ValueError("lmap column count must be a perfect square")
    if frobenius(lmap) == 0.0:
        return [e.reshape(d, d) for e in np.eye(d * d, dtype=np.complex128)]
    _, sv, vh = np.linalg.svd(lmap, full_matrices=True)
    smax = sv[0] if sv.size else 0.0
    cutoff = tol.nullspace_residual * max(1.0, smax)
    basis = []
    for k in range(lmap.shape[1]):
        s = sv[k] if k < sv.size else 0.0
        if s <= cutoff:
            x = vh[k].conj().reshape(d, d)
            if np.linalg.norm(lmap @ vh[k].conj()) <= tol.nullspace_residual * max(1.0, smax):
                basis.append(x)
    return basis


def matrix_to_json(a: np.ndarray) -> dict:
    """Row-major {"dim", "re", "im"} encoding with IEEE-754 doubles."""
    a = as_matrix(a)
    flat = a.reshape(-1)
    return {
        "dim": int(a.shape[0]),
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    n = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=np.float64)
    im = np.asarray(obj["im"], dtype=np.float64)
    if re.size != n * n or im.size != n * n:
        raise ValueError("re/im arrays must have length dim*dim")
    return as_matrix((re + 1j * im).reshape(n, n))


def cluster_values(values: Sequence[float], rel_gap: float) -> list[list[int]]:
    """Group sorted positions of near-equal reals; gap threshold is relative
    to the value spread (absolute floor 1 when the spread is tiny)."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        return []
    order = np.argsort(vals, kind="stable")
    spread = float(vals.max() - vals.min())
    gap = rel_gap * max(spread, 1.0)
    groups: list[list[int]] = [[int(order[0])]]
    for idx in order[1:]:
        if vals[idx] - vals[groups[-1][-1]] <= gap:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups
