"""Dynamical Lie algebra generation and controllability verdicts.

The closure is taken over the reals inside the skew-Hermitian matrices with
the inner product Re Tr(a* b); a bracket candidate is admitted when its
residual after projection onto the current span exceeds a relative threshold.
Strong controllability of a control system over its algebra M holds exactly
when the closure dimension reaches dim_R u(M) = sum n_k^2 with every basis
element affiliated to M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import BlockAlgebra, CenterReport, center_and_factor, check_affiliated
from .config import DEFAULT_TOL, Tolerances
from .errors import NotAffiliated, NotNormal
from .linalg import as_matrix, frobenius, skew_defect


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Commutator ab - ba; skew-Hermitian whenever a and b are."""
    a = as_matrix(a)
    b = as_matrix(b)
    return a @ b - b @ a


@dataclass(frozen=True)
class LieBasis:
    elements: tuple[np.ndarray, ...]

    @property
    def dim_real(self) -> int:
        return len(self.elements)


def generate_lie_algebra(
    gens: list[np.ndarray] | tuple[np.ndarray, ...], tol: Tolerances = DEFAULT_TOL
) -> LieBasis:
    """Breadth-first bracket closure with Gram-Schmidt admission.

    Generators are HS-normalized first so the relative admission threshold is
    scaling-invariant; the returned basis is orthonormal, skew-Hermitian, and
    closed under bracket to within the closure tolerance.
    """
    if not gens:
        raise ValueError("need at least one generator")
    mats = []
    for g in gens:
        g = as_matrix(g)
        if skew_defect(g) > tol.hermitian_check * max(1.0, frobenius(g)):
            raise NotNormal("generators must be skew-Hermitian")
        n = frobenius(g)
        if n > 0:
            mats.append(g / n)
    dim = mats[0].shape[0] if mats else 0
    cap = dim * dim

    # real-vector view of the skew subspace keeps projections in BLAS
    def as_real(m: np.ndarray) -> np.ndarray:
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    def as_mat(v: np.ndarray) -> np.ndarray:
        half = dim * dim
        return (v[:half] + 1j * v[half:]).reshape(dim, dim)

    basis: list[np.ndarray] = []
    rows = np.zeros((0, 2 * dim * dim))

    def admit(x: np.ndarray) -> bool:
        nonlocal rows
        nx = frobenius(x)
        # basis elements are orthonormal, so brackets below the floor are
        # matmul round-off rather than genuine directions
        if nx <= tol.lie_zero_floor:
            return False
        v = as_real(x)
        # two orthogonalization passes stabilize deep bracket towers
        v = v - rows.T @ (rows @ v)
        v = v - rows.T @ (rows @ v)
        nr = float(np.linalg.norm(v))
        if nr > tol.lie_admission * nx:
            v /= nr
            rows = np.vstack([rows, v])
            basis.append(as_mat(v))
            return True
        return False

    for g in mats:
        admit(g)
    done = 0
    while done < len(basis) and len(basis) < cap:
        x = basis[done]
        for l in range(done):
            admit(bracket(x, basis[l]))
        done += 1
    return LieBasis(elements=tuple(basis))


@dataclass(frozen=True)
class ControlSystem:
    drift: np.ndarray
    controls: tuple[np.ndarray, ...]
    algebra: BlockAlgebra

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    def generators(self) -> list[np.ndarray]:
        return [self.drift, *self.controls]


def make_control_system(
    drift: np.ndarray,
    controls: list[np.ndarray] | tuple[np.ndarray, ...],
    algebra: BlockAlgebra,
    tol: Tolerances = DEFAULT_TOL,
) -> ControlSystem:
    """Validate skewness and affiliation of the drift and every control."""
    drift = as_matrix(drift)
    mats = [drift] + [as_matrix(c) for c in controls]
    for g in mats:
        if skew_defect(g) > tol.hermitian_check * max(1.0, frobenius(g)):
            raise NotNormal("drift and controls must be skew-Hermitian")
        if g.shape[0] != algebra.ambient_dim:
            raise ValueError("operator dimension must match the algebra")
        if not check_affiliated(g, algebra, tol=tol).verdict:
            raise NotAffiliated("an operator is not affiliated with the algebra")
    return ControlSystem(drift=mats[0], controls=tuple(mats[1:]), algebra=algebra)


@dataclass(frozen=True)
class LarcReport:
    dim: int
    dim_u_algebra: int
    strong_controllable: bool
    is_factor: bool
    pure_state_obstruction: bool
    max_affiliation_residual: float

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "dim_uM": self.dim_u_algebra,
            "strong_controllable": self.strong_controllable,
            "is_factor": self.is_factor,
            "pure_state_obstruction": self.pure_state_obstruction,
            "max_affiliation_residual": self.max_affiliation_residual,
        }


def larc_verdict(sys: ControlSystem, tol: Tolerances = DEFAULT_TOL) -> LarcReport:
    """Lie-algebra rank verdict for strong controllability over sys.algebra.

    Also flags the pure-state obstruction: over a non-factor algebra the
    member unitaries cannot act transitively on unit vectors, whatever the
    rank says. The reachable-group side stays implicit: in finite dimensions
    the exponentials of the closure generate the connected subgroup, so the
    closure dimension alone decides the verdict.
    """
    for g in sys.generators():
        if not check_affiliated(g, sys.algebra, tol=tol).verdict:
            raise NotAffiliated("a generator fails affiliation against the algebra")
    basis = generate_lie_algebra(sys.generators(), tol=tol)
    worst = 0.0
    for b in basis.elements:
        worst = max(worst, check_affiliated(b, sys.algebra, tol=tol).residual)
    center: CenterReport = center_and_factor(sys.algebra)
    d = basis.dim_real
    du = sys.algebra.dim_member_space
    controllable = bool(d == du and worst <= tol.lie_admission)
    return LarcReport(
        dim=d,
        dim_u_algebra=du,
        strong_controllable=controllable,
        is_factor=center.is_factor,
        pure_state_obstruction=not center.is_factor,
        max_affiliation_residual=worst,
    )
