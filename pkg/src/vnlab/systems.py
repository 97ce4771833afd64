"""Example systems on truncated Fock spaces: a two-level atom coupled to a
cavity mode (Jaynes-Cummings) and the controlled harmonic oscillator that
fails to fit any finite-trace algebra.

Truncation corrupts only the top Fock levels, so every verification claim is
made on an interior compression (first 75% of levels by default) and the
excluded edge is reported, never hidden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    AffiliationCertificate,
    BlockAlgebra,
    check_affiliated,
    commutant,
    make_block_algebra,
)
from .config import DEFAULT_TOL, Tolerances
from .errors import BadCutoff
from .lie import bracket, generate_lie_algebra
from .linalg import apply_spectral_function, as_matrix, cluster_values, eig_hermitian, frobenius

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def lowering_operator(n_max: int) -> np.ndarray:
    """Fock-truncated annihilation: a[n-1, n] = sqrt(n)."""
    a = np.zeros((n_max, n_max), dtype=np.complex128)
    for n in range(1, n_max):
        a[n - 1, n] = np.sqrt(n)
    return a


# ---------------------------------------------------------------------------
# Jaynes-Cummings


@dataclass(frozen=True)
class JaynesCummingsModel:
    fock_cutoff: int
    omega_atom: float
    omega_interaction: float
    omega_cavity: float
    h_atom: np.ndarray
    h_interaction: np.ndarray
    h_cavity: np.ndarray
    h_total: np.ndarray
    symmetry: np.ndarray
    eigenblock_algebra: BlockAlgebra
    interior_fock: int

    @property
    def ambient_dim(self) -> int:
        return 2 * self.fock_cutoff

    def hamiltonians(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.h_atom, self.h_interaction, self.h_cavity


def _eigenblock_from_diagonal(diag: np.ndarray, tol: Tolerances) -> BlockAlgebra:
    clusters = cluster_values(diag.real, tol.block_gap_rel)
    blocks = [(len(c), 1) for c in clusters]
    perm = [i for c in clusters for i in c]
    return make_block_algebra(blocks, perm=perm, tol=tol)


def build_jaynes_cummings(
    n_max: int,
    omega_atom: float = 1.0,
    omega_interaction: float = 1.0,
    omega_cavity: float = 1.0,
    interior_fraction: float = 0.75,
    tol: Tolerances = DEFAULT_TOL,
) -> JaynesCummingsModel:
    """Two-level atom in a cavity, photon modes truncated at n_max.

    Ordering: atom (x) Fock, coordinate = atom*n_max + level. The symmetry
    generator counts excitations, V = 1 (x) a*a + (sigma_z - 1)/2 (x) 1; its
    spectrum is the consecutive integers -1 .. n_max-1, the bottom eigenvalue
    -1 is simple, and every interior eigenspace is the two-dimensional ladder
    pair span{e1 (x) |m>, e2 (x) |m+1>} that all three Hamiltonians preserve.
    """
    if n_max < 3:
        raise BadCutoff("need at least 3 photon levels")
    a = lowering_operator(n_max)
    number = a.conj().T @ a
    eye2 = np.eye(2, dtype=np.complex128)
    eyef = np.eye(n_max, dtype=np.complex128)
    e12 = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
    e21 = e12.T.copy()
    h_atom = np.kron(SIGMA_Z, eyef) / 2.0
    h_interaction = np.kron(e12, a) + np.kron(e21, a.conj().T)
    h_cavity = np.kron(eye2, number)
    symmetry = np.kron(eye2, number) + np.kron((SIGMA_Z - eye2) / 2.0, eyef)
    h_total = omega_atom * h_atom + omega_interaction * h_interaction + omega_cavity * h_cavity
    eigenblock = _eigenblock_from_diagonal(np.diag(symmetry), tol)
    return JaynesCummingsModel(
        fock_cutoff=n_max,
        omega_atom=omega_atom,
        omega_interaction=omega_interaction,
        omega_cavity=omega_cavity,
        h_atom=h_atom,
        h_interaction=h_interaction,
        h_cavity=h_cavity,
        h_total=h_total,
        symmetry=symmetry,
        eigenblock_algebra=eigenblock,
        interior_fock=int(interior_fraction * n_max),
    )


def _fock_level(model: JaynesCummingsModel, coord: int) -> int:
    return coord % model.fock_cutoff


def _interior_flags(model: JaynesCummingsModel) -> list[bool]:
    alg = model.eigenblock_algebra
    flags = []
    for k in range(alg.n_blocks):
        coords = alg.block_coords(k)
        flags.append(all(_fock_level(model, int(c)) < model.interior_fock for c in coords))
    return flags


def _compress(mat: np.ndarray, coords: np.ndarray) -> np.ndarray:
    return mat[np.ix_(coords, coords)]


@dataclass(frozen=True)
class JCSymmetryReport:
    interior_residuals: tuple[float, float, float]
    edge_residuals: tuple[float, float, float]
    verdict: bool
    interior_certificates: tuple[AffiliationCertificate, ...]
    closure_dim: int
    closure_max_affiliation_residual: float

    def to_json(self) -> dict:
        return {
            "interior_commutation_residuals": list(self.interior_residuals),
            "edge_residual": list(self.edge_residuals),
            "verdict": self.verdict,
            "interior_affiliation": [c.as_dict() for c in self.interior_certificates],
            "closure_dim": self.closure_dim,
            "closure_max_affiliation_residual": self.closure_max_affiliation_residual,
        }


def verify_symmetry(model: JaynesCummingsModel, tol: Tolerances = DEFAULT_TOL) -> JCSymmetryReport:
    """Commutation of the Hamiltonians with the symmetry eigenprojections.

    Interior residuals drive the verdict; the truncation edge is reported
    separately. Also closes {iH1, iH2, iH3} under brackets and reports the
    worst affiliation residual of the closure against the interior-compressed
    eigenspace block algebra.
    """
    alg = model.eigenblock_algebra
    flags = _interior_flags(model)
    d = model.ambient_dim
    projections = []
    for k in range(alg.n_blocks):
        p = np.zeros((d, d), dtype=np.complex128)
        coords = alg.block_coords(k)
        p[coords, coords] = 1.0
        projections.append(p)

    interior, edge = [], []
    for h in model.hamiltonians():
        res_in, res_edge = 0.0, 0.0
        for k, p in enumerate(projections):
            r = frobenius(h @ p - p @ h)
            if flags[k]:
                res_in = max(res_in, r)
            else:
                res_edge = max(res_edge, r)
        interior.append(res_in)
        edge.append(res_edge)

    interior_coords = np.concatenate(
        [alg.block_coords(k) for k in range(alg.n_blocks) if flags[k]]
    )
    interior_blocks = [(alg.blocks[k][0], 1) for k in range(alg.n_blocks) if flags[k]]
    reindex = {int(c): i for i, c in enumerate(interior_coords)}
    perm = [reindex[int(c)] for k in range(alg.n_blocks) if flags[k] for c in alg.block_coords(k)]
    interior_alg = make_block_algebra(interior_blocks, perm=perm, tol=tol)
    certificates = tuple(
        check_affiliated(_compress(h, interior_coords), interior_alg, tol=tol)
        for h in model.hamiltonians()
    )

    closure = generate_lie_algebra([1j * h for h in model.hamiltonians()], tol=tol)
    worst = 0.0
    for b in closure.elements:
        cert = check_affiliated(_compress(b, interior_coords), interior_alg, tol=tol)
        worst = max(worst, cert.residual)

    return JCSymmetryReport(
        interior_residuals=tuple(interior),
        edge_residuals=tuple(edge),
        verdict=bool(max(interior) <= tol.affiliation),
        interior_certificates=certificates,
        closure_dim=closure.dim_real,
        closure_max_affiliation_residual=worst,
    )


# ---------------------------------------------------------------------------
# Harmonic oscillator non-example


@dataclass(frozen=True)
class OscillatorModel:
    cutoff: int
    interior_dim: int
    position: np.ndarray
    momentum: np.ndarray
    v0: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    v1: np.ndarray
    v2: np.ndarray


def build_oscillator(n_max: int, interior_fraction: float = 0.75) -> OscillatorModel:
    """Quadrature operators x = (a + a*)/sqrt2, p = i(a* - a)/sqrt2 and the
    squeeze drift v0 = -(i/2)(p^2 - x^2) with ladder-combination controls."""
    if n_max < 8:
        raise BadCutoff("need at least 8 levels")
    a = lowering_operator(n_max)
    x = (a + a.conj().T) / np.sqrt(2.0)
    p = 1j * (a.conj().T - a) / np.sqrt(2.0)
    v0 = -0.5j * (p @ p - x @ x)
    v_plus = (p - x) / np.sqrt(2.0)
    v_minus = -(p + x) / np.sqrt(2.0)
    return OscillatorModel(
        cutoff=n_max,
        interior_dim=int(interior_fraction * n_max),
        position=x,
        momentum=p,
        v0=v0,
        v_plus=v_plus,
        v_minus=v_minus,
        v1=v_plus - v_minus,
        v2=1j * (v_plus + v_minus),
    )


def _masked_complex_closure(
    gens: list[np.ndarray],
    mask: int,
    admission_rel: float,
    cap: int,
    zero_floor: float = DEFAULT_TOL.lie_zero_floor,
) -> list[np.ndarray]:
    """Bracket closure over complex scalars, with admission decided on the
    interior window mat[:mask, :mask] so truncation-edge junk cannot inflate
    the dimension. Representatives are kept Frobenius-normalized, which pins
    the round-off floor: candidates with window norm below it are bracket
    noise, not directions. Returns full-size representatives."""

    def window(m: np.ndarray) -> np.ndarray:
        return m[:mask, :mask].reshape(-1)

    reps: list[np.ndarray] = []
    ortho: list[np.ndarray] = []

    def admit(m: np.ndarray) -> bool:
        nm = frobenius(m)
        if nm == 0.0:
            return False
        m = m / nm
        w = window(m)
        nw = np.linalg.norm(w)
        if nw <= zero_floor:
            return False
        r = w.copy()
        for b in ortho:
            r -= np.vdot(b, r) * b
        for b in ortho:
            r -= np.vdot(b, r) * b
        if np.linalg.norm(r) > admission_rel * nw:
            reps.append(m)
            ortho.append(r / np.linalg.norm(r))
            return True
        return False

    for g in gens:
        admit(g)
    done = 0
    while done < len(reps) and len(reps) < cap:
        x = reps[done]
        for l in range(done):
            admit(bracket(x, reps[l]))
        done += 1
    return reps


@dataclass(frozen=True)
class OscillatorReport:
    interior_bracket_residuals: tuple[float, float, float]
    edge_bracket_residuals: tuple[float, float, float]
    closure_dim: int
    commutant_dim: int

    def to_json(self) -> dict:
        return {
            "interior_bracket_residuals": list(self.interior_bracket_residuals),
            "edge_residual": list(self.edge_bracket_residuals),
            "closure_dim": self.closure_dim,
            "commutant_dim": self.commutant_dim,
        }


def verify_oscillator_brackets(
    model: OscillatorModel,
    t_samples: tuple[float, float] = (0.5, 1.0),
    tol: Tolerances = DEFAULT_TOL,
) -> OscillatorReport:
    """Ladder bracket identities, closure dimension, and commutant triviality.

    The identities [v0, v+] = v+, [v0, v-] = -v-, [v+, v-] = iI hold exactly
    away from the truncation edge (the commutator of two self-adjoint
    operators is skew-adjoint, hence the iI). The bracket closure of
    {v0, v1, v2} is taken over complex scalars, where v1, v2 span the same
    space as the ladder pair and the closure stops at dimension four; sampled
    exponentials of interior position/momentum have a trivial commutant, the
    finite echo of irreducibility.
    """
    m = model.interior_dim
    eye = np.eye(model.cutoff, dtype=np.complex128)

    def rel_residual(lhs: np.ndarray, rhs: np.ndarray) -> tuple[float, float]:
        diff = lhs - rhs
        interior = frobenius(diff[:m, :m]) / max(frobenius(rhs[:m, :m]), 1e-300)
        full = frobenius(diff) / max(frobenius(rhs), 1e-300)
        return interior, full

    pairs = [
        (bracket(model.v0, model.v_plus), model.v_plus),
        (bracket(model.v0, model.v_minus), -model.v_minus),
        (bracket(model.v_plus, model.v_minus), 1j * eye),
    ]
    interior_res, edge_res = zip(*(rel_residual(lhs, rhs) for lhs, rhs in pairs))

    closure = _masked_complex_closure(
        [model.v0, model.v1, model.v2], m, tol.lie_admission, cap=m * m
    )

    x_int = as_matrix(model.position[:m, :m])
    p_int = as_matrix(model.momentum[:m, :m])
    sampled = []
    for t in t_samples:
        for op in (x_int, p_int):
            dec = eig_hermitian(op, tol=tol)
            sampled.append(apply_spectral_function(dec, lambda w: np.exp(t * w)))
    commutant_dim = len(commutant(sampled, tol=tol))

    return OscillatorReport(
        interior_bracket_residuals=tuple(interior_res),
        edge_bracket_residuals=tuple(edge_res),
        closure_dim=len(closure),
        commutant_dim=commutant_dim,
    )
