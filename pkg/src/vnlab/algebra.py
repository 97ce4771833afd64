"""Finite-dimensional surrogates for finite tracial von Neumann algebras.

A BlockAlgebra describes, up to a coordinate permutation, the *-algebra

    M = P ( sum_k  M_{n_k} (x) I_{m_k} ) P^T

with a normalized trace tau(a) = sum_k c_k tr(a_k)/n_k. Members mix only the
internal index of each block; the commutant mixes only the multiplicity copy,
so M' = P ( sum_k I_{n_k} (x) M_{m_k} ) P^T.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import (
    BadPartition,
    BadPermutation,
    BadWeights,
    BlockDetectionError,
    NotMember,
)
from .linalg import as_matrix, eig_hermitian, frobenius, nullspace_basis

# Gram path kicks in when the stacked commutator map would get too large
_STACK_ENTRY_LIMIT = 8_000_000


@dataclass(frozen=True)
class BlockAlgebra:
    blocks: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    perm: tuple[int, ...]

    @property
    def ambient_dim(self) -> int:
        return sum(n * m for n, m in self.blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def dim_member_space(self) -> int:
        """Complex dimension of M (= real dimension of u(M))."""
        return sum(n * n for n, _ in self.blocks)

    @property
    def dim_commutant_space(self) -> int:
        return sum(m * m for _, m in self.blocks)

    def block_offset(self, k: int) -> int:
        return sum(n * m for n, m in self.blocks[:k])

    def coord(self, k: int, i: int, j: int) -> int:
        """Ambient coordinate of internal index i, multiplicity copy j of block k."""
        n, m = self.blocks[k]
        return self.perm[self.block_offset(k) + i * m + j]

    def block_coords(self, k: int) -> np.ndarray:
        n, m = self.blocks[k]
        o = self.block_offset(k)
        return np.asarray(self.perm[o : o + n * m], dtype=np.intp)

    def identity(self) -> np.ndarray:
        return np.eye(self.ambient_dim, dtype=np.complex128)

    def member_from_blocks(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        """Assemble the ambient matrix sum_k parts[k] (x) I_{m_k}."""
        if len(parts) != self.n_blocks:
            raise ValueError("one block matrix per block required")
        d = self.ambient_dim
        out = np.zeros((d, d), dtype=np.complex128)
        for k, (n, m) in enumerate(self.blocks):
            a = as_matrix(parts[k])
            if a.shape != (n, n):
                raise ValueError(f"block {k} must be {n}x{n}")
            cm = self.block_coords(k).reshape(n, m)
            for j in range(m):
                out[np.ix_(cm[:, j], cm[:, j])] += a
        return out

    def blocks_of(self, a: np.ndarray) -> tuple[list[np.ndarray], float]:
        """Best member approximation per block and the relative defect.

        The returned parts average a over multiplicity copies; the defect is
        ||a - member(parts)||_F / max(1, ||a||_F), zero exactly for members.
        """
        a = as_matrix(a)
        if a.shape[0] != self.ambient_dim:
            raise ValueError("dimension mismatch with the algebra")
        parts = []
        for k, (n, m) in enumerate(self.blocks):
            cm = self.block_coords(k).reshape(n, m)
            acc = np.zeros((n, n), dtype=np.complex128)
            for j in range(m):
                acc += a[np.ix_(cm[:, j], cm[:, j])]
            parts.append(acc / m)
        resid = frobenius(a - self.member_from_blocks(parts)) / max(1.0, frobenius(a))
        return parts, resid

    def project_to_member(self, a: np.ndarray) -> np.ndarray:
        """Trace-preserving projection of an ambient matrix onto M."""
        parts, _ = self.blocks_of(a)
        return self.member_from_blocks(parts)

    def member_defect(self, a: np.ndarray) -> float:
        return self.blocks_of(a)[1]

    def algebra_generators(self) -> list[np.ndarray]:
        """Matrix units spanning M (n_k^2 per block)."""
        gens = []
        for k, (n, m) in enumerate(self.blocks):
            for i in range(n):
                for i2 in range(n):
                    unit = np.zeros((n, n), dtype=np.complex128)
                    unit[i, i2] = 1.0
                    parts = [
                        unit if kk == k else np.zeros((nn, nn), dtype=np.complex128)
                        for kk, (nn, _) in enumerate(self.blocks)
                    ]
                    gens.append(self.member_from_blocks(parts))
        return gens

    def commutant_generators(self) -> list[np.ndarray]:
        """Matrix units spanning M' (m_k^2 per block)."""
        gens = []
        d = self.ambient_dim
        for k, (n, m) in enumerate(self.blocks):
            cm = self.block_coords(k).reshape(n, m)
            for j in range(m):
                for j2 in range(m):
                    g = np.zeros((d, d), dtype=np.complex128)
                    g[cm[:, j], cm[:, j2]] = 1.0
                    gens.append(g)
        return gens

    def to_json(self) -> dict:
        return {
            "blocks": [[n, m] for n, m in self.blocks],
            "weights": list(self.weights),
            "perm": list(self.perm),
        }

    @staticmethod
    def from_json(obj: dict) -> "BlockAlgebra":
        return make_block_algebra(
            [tuple(b) for b in obj["blocks"]], obj["weights"], obj.get("perm")
        )


def make_block_algebra(
    blocks: Sequence[tuple[int, int]],
    weights: Sequence[float] | None = None,
    perm: Sequence[int] | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> BlockAlgebra:
    """Validate and build a BlockAlgebra.

    weights default to the uniform ambient trace c_k = n_k m_k / dim; perm
    defaults to the identity layout.
    """
    blocks = tuple((int(n), int(m)) for n, m in blocks)
    if not blocks or any(n < 1 or m < 1 for n, m in blocks):
        raise BadWeights("blocks must be nonempty with positive sizes")
    d = sum(n * m for n, m in blocks)
    if weights is None:
        weights = [n * m / d for n, m in blocks]
    weights = tuple(float(w) for w in weights)
    if len(weights) != len(blocks) or any(w <= 0 for w in weights):
        raise BadWeights("one positive weight per block required")
    if abs(sum(weights) - 1.0) > tol.weights_sum:
        raise BadWeights(f"weights sum to {sum(weights)!r}, expected 1")
    if perm is None:
        perm = range(d)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(d)):
        raise BadPermutation("perm must be a permutation of the ambient coordinates")
    return BlockAlgebra(blocks=blocks, weights=weights, perm=perm)


def diagonal_algebra(dim: int, weights: Sequence[float] | None = None) -> BlockAlgebra:
    """The abelian algebra of diagonal matrices on C^dim."""
    return make_block_algebra([(1, 1)] * dim, weights)


def trace_of(a: np.ndarray, alg: BlockAlgebra, tol: Tolerances = DEFAULT_TOL) -> complex:
    """Normalized trace tau(a) = sum_k c_k tr(a_k)/n_k of a member."""
    parts, resid = alg.blocks_of(a)
    if resid > tol.membership:
        raise NotMember(f"membership defect {resid:.3e} exceeds tolerance")
    return complex(
        sum(w * np.trace(p) / n for w, p, (n, _) in zip(alg.weights, parts, alg.blocks))
    )


@dataclass(frozen=True)
class AffiliationCertificate:
    residual: float
    verdict: bool
    generator_count: int
    operator: np.ndarray | None = None
    algebra: BlockAlgebra | None = None

    def as_dict(self) -> dict:
        return {
            "residual": self.residual,
            "verdict": self.verdict,
            "generator_count": self.generator_count,
        }


def check_affiliated(
    a: np.ndarray, alg: BlockAlgebra, tol: Tolerances = DEFAULT_TOL
) -> AffiliationCertificate:
    """Commutation test against the commutant generators.

    residual = max_j ||a g_j - g_j a|| / (||a|| ||g_j||) in Hilbert-Schmidt
    norm; verdict true iff it is within tolerance. In these finite surrogates
    a passing verdict is equivalent to membership in M.
    """
    a = as_matrix(a)
    gens = alg.commutant_generators()
    na = frobenius(a)
    if na == 0.0:
        return AffiliationCertificate(0.0, True, len(gens), a, alg)
    worst = 0.0
    for g in gens:
        worst = max(worst, frobenius(a @ g - g @ a) / (na * frobenius(g)))
    return AffiliationCertificate(worst, bool(worst <= tol.affiliation), len(gens), a, alg)


def _commutator_rows(a: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    return np.kron(a, eye) - np.kron(eye, a.T)


def commutant(
    mats: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOL
) -> list[np.ndarray]:
    """Orthonormal (HS) basis of {X : [X, a] = [X, a*] = 0 for all a}.

    Computed as the nullspace of the stacked commutator map; adjoints are
    added internally so the span is always a *-algebra containing I.
    """
    mats = [as_matrix(a) for a in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    d = mats[0].shape[0]
    if any(a.shape[0] != d for a in mats):
        raise ValueError("matrices must share a dimension")
    gens: list[np.ndarray] = []
    for a in mats:
        na = frobenius(a)
        if na == 0.0:
            continue
        gens.append(a / na)
        adj = a.conj().T / na
        if frobenius(a / na - adj) > 1e-14:
            gens.append(adj)
    if not gens:
        gens = [np.eye(d, dtype=np.complex128)]

    if len(gens) * d**4 <= _STACK_ENTRY_LIMIT:
        stacked = np.vstack([_commutator_rows(a) for a in gens])
        basis = nullspace_basis(stacked, tol=tol)
    else:
        # Gram of the stacked map assembled from small products:
        # L_a* L_a = a*a (x) I + I (x) conj(a) a^T - a* (x) a^T - a (x) conj(a)
        gram = np.zeros((d * d, d * d), dtype=np.complex128)
        eye = np.eye(d, dtype=np.complex128)
        for a in gens:
            gram += np.kron(a.conj().T @ a, eye)
            gram += np.kron(eye, a.conj() @ a.T)
            gram -= np.kron(a.conj().T, a.T)
            gram -= np.kron(a, a.conj())
        lam, vecs = np.linalg.eigh(gram)
        sv = np.sqrt(np.maximum(lam, 0.0))
        cutoff = tol.nullspace_residual * max(1.0, float(sv[-1]))
        basis = [vecs[:, k].reshape(d, d) for k in range(d * d) if sv[k] <= cutoff]
    keep = []
    for x in basis:
        if all(frobenius(x @ a - a @ x) <= tol.nullspace_residual * 10 for a in gens):
            keep.append(x)
    return keep


def _support_graph(basis: Sequence[np.ndarray], d: int) -> np.ndarray:
    t = np.zeros((d, d))
    for g in basis:
        t += np.abs(g) ** 2
    return t


def _components(adj: np.ndarray, nodes: Sequence[int], thresh: float) -> list[list[int]]:
    nodes = list(nodes)
    seen: set[int] = set()
    comps = []
    for start in nodes:
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            c = stack.pop()
            comp.append(c)
            for c2 in nodes:
                if c2 not in seen and (adj[c, c2] > thresh or adj[c2, c] > thresh):
                    seen.add(c2)
                    stack.append(c2)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def bicommutant_algebra(
    mats: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOL
) -> BlockAlgebra:
    """Block structure of the *-algebra generated by mats (their bicommutant).

    Works by simultaneously block-diagonalizing the commutant through
    coordinate support graphs; requires the generated algebra to align with
    the ambient coordinates up to a permutation (true for every model built
    here), otherwise BlockDetectionError is raised. Trace weights are the
    uniform ambient trace.
    """
    mats = [as_matrix(a) for a in mats]
    d = mats[0].shape[0]
    comm = commutant(mats, tol=tol)
    alg = commutant(comm, tol=tol)
    t_alg = _support_graph(alg, d)
    t_comm = _support_graph(comm, d)
    thresh = tol.block_gap_rel * max(float(t_alg.max()), float(t_comm.max()), 1.0)

    blocks: list[tuple[int, int]] = []
    perm: list[int] = []
    for comp in _components(t_alg + t_comm, range(d), thresh):
        iclasses = _components(t_comm, comp, thresh)
        jclasses = _components(t_alg, comp, thresh)
        n, m = len(iclasses), len(jclasses)
        if n * m != len(comp):
            raise BlockDetectionError(
                f"central block of size {len(comp)} does not factor as {n}x{m}"
            )
        islot = {c: i for i, cls in enumerate(iclasses) for c in cls}
        jslot = {c: j for j, cls in enumerate(jclasses) for c in cls}
        table = {}
        for c in comp:
            key = (islot[c], jslot[c])
            if key in table:
                raise BlockDetectionError("coordinate labeling is not a bijection")
            table[key] = c
        for i in range(n):
            for j in range(m):
                if (i, j) not in table:
                    raise BlockDetectionError("coordinate labeling is not a bijection")
                perm.append(table[(i, j)])
        blocks.append((n, m))

    out = make_block_algebra(blocks, perm=perm, tol=tol)
    for a in mats:
        if out.member_defect(a) > tol.membership:
            raise BlockDetectionError("an input is not a member of the detected algebra")
    return out


@dataclass(frozen=True)
class CenterReport:
    center_dim: int
    is_factor: bool
    witness: tuple[np.ndarray, np.ndarray] | None


def center_and_factor(alg: BlockAlgebra) -> CenterReport:
    """Center dimension (= number of blocks) and, when not a factor, a pair of
    unit vectors in distinct central subspaces that no member unitary can map
    onto each other."""
    k = alg.n_blocks
    if k == 1:
        return CenterReport(1, True, None)
    d = alg.ambient_dim
    v1 = np.zeros(d, dtype=np.complex128)
    v2 = np.zeros(d, dtype=np.complex128)
    v1[alg.block_coords(0)[0]] = 1.0
    v2[alg.block_coords(1)[0]] = 1.0
    return CenterReport(k, False, (v1, v2))


@dataclass(frozen=True)
class ConditionalExpectation:
    """Trace-preserving conditional expectation onto a coarser block structure.

    cells partition the block indices; blocks inside a cell must share the
    internal size n and are averaged with their trace weights (for abelian
    blocks this is a weighted average of diagonal cells; in general it pinches
    onto the partial-diagonal subalgebra)."""

    algebra: BlockAlgebra
    cells: tuple[tuple[int, ...], ...]

    @property
    def is_identity(self) -> bool:
        return all(len(c) == 1 for c in self.cells)

    def apply(self, a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        parts, resid = self.algebra.blocks_of(a)
        if resid > tol.membership:
            raise NotMember(f"membership defect {resid:.3e} exceeds tolerance")
        w = self.algebra.weights
        out = list(parts)
        for cell in self.cells:
            tot = sum(w[k] for k in cell)
            avg = sum(w[k] * parts[k] for k in cell) / tot
            for k in cell:
                out[k] = avg
        return self.algebra.member_from_blocks(out)

    def refines(self, other: "ConditionalExpectation") -> bool:
        """True when every cell of self sits inside a cell of other."""
        osets = [set(c) for c in other.cells]
        return all(any(set(c) <= o for o in osets) for c in self.cells)

    def cells_json(self) -> list[list[int]]:
        return [list(c) for c in self.cells]


def conditional_expectation(
    alg: BlockAlgebra, cells: Iterable[Iterable[int]]
) -> ConditionalExpectation:
    """Validate a block partition and build the expectation onto it."""
    norm = tuple(tuple(sorted(int(k) for k in cell)) for cell in cells)
    flat = [k for cell in norm for k in cell]
    if not norm or any(len(c) == 0 for c in norm):
        raise BadPartition("cells must be nonempty")
    if sorted(flat) != list(range(alg.n_blocks)):
        raise BadPartition("cells must partition the block indices")
    for cell in norm:
        sizes = {alg.blocks[k][0] for k in cell}
        if len(sizes) != 1:
            raise BadPartition(
                f"cell {cell} merges blocks of unequal internal size {sorted(sizes)}"
            )
    return ConditionalExpectation(algebra=alg, cells=norm)


def identity_expectation(alg: BlockAlgebra) -> ConditionalExpectation:
    return conditional_expectation(alg, [[k] for k in range(alg.n_blocks)])


def apply_expectation(
    exp: ConditionalExpectation, a: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    return exp.apply(a, tol=tol)


@dataclass(frozen=True)
class GnsForm:
    """Left-regular (GNS) representation of the algebra on itself.

    The representation space has one coordinate per matrix-unit direction
    (dimension sum n_k^2, multiplicities drop out); represent() gives the
    left-multiplication matrix of a member and cyclic_vector is the class of
    the identity, so tau(a) = <represent(a) xi, xi>."""

    algebra: BlockAlgebra
    dimension: int
    cyclic_vector: np.ndarray

    def represent(self, a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        parts, resid = self.algebra.blocks_of(a)
        if resid > tol.membership:
            raise NotMember(f"membership defect {resid:.3e} exceeds tolerance")
        mats = []
        for part, (n, _) in zip(parts, self.algebra.blocks):
            mats.append(np.kron(part, np.eye(n, dtype=np.complex128)))
        d = self.dimension
        out = np.zeros((d, d), dtype=np.complex128)
        o = 0
        for m in mats:
            s = m.shape[0]
            out[o : o + s, o : o + s] = m
            o += s
        return out

    def trace_via_form(self, a: np.ndarray) -> complex:
        xi = self.cyclic_vector
        return complex(np.vdot(xi, self.represent(a) @ xi))


def gns_standard_form(alg: BlockAlgebra) -> GnsForm:
    """Standard form of (M, tau): orthonormal basis of scaled matrix units
    sqrt(n_k/c_k) e^k_{ij}, cyclic vector with weight sqrt(c_k/n_k) on each
    diagonal unit."""
    dim = alg.dim_member_space
    xi = np.zeros(dim, dtype=np.complex128)
    o = 0
    for (n, _), w in zip(alg.blocks, alg.weights):
        for i in range(n):
            xi[o + i * n + i] = np.sqrt(w / n)
        o += n * n
    return GnsForm(algebra=alg, dimension=dim, cyclic_vector=xi)


@dataclass(frozen=True)
class SingularValueFunction:
    """Right-continuous non-increasing step function on [0, 1); each step
    carries the trace mass of its eigenvalue cell and the steps integrate to
    the trace norm."""

    breakpoints: tuple[tuple[float, float], ...]

    def value_at(self, t: float) -> float:
        if not 0.0 <= t < 1.0:
            raise ValueError("t must lie in [0, 1)")
        val = self.breakpoints[0][1]
        for start, mu in self.breakpoints:
            if start <= t:
                val = mu
            else:
                break
        return val

    def integral(self) -> float:
        starts = [b[0] for b in self.breakpoints] + [1.0]
        return float(
            sum((starts[i + 1] - starts[i]) * self.breakpoints[i][1]
                for i in range(len(self.breakpoints)))
        )


def singular_value_function(
    a: np.ndarray, alg: BlockAlgebra, tol: Tolerances = DEFAULT_TOL
) -> SingularValueFunction:
    """Generalized singular numbers of a member: the non-increasing
    rearrangement of the spectrum of |a| weighted by the trace."""
    parts, resid = alg.blocks_of(a)
    if resid > tol.membership:
        raise NotMember(f"membership defect {resid:.3e} exceeds tolerance")
    weighted: list[tuple[float, float]] = []
    for part, (n, _), w in zip(parts, alg.blocks, alg.weights):
        gram = part.conj().T @ part
        dec = eig_hermitian(gram, tol=tol)
        for lam in dec.eigenvalues:
            weighted.append((float(np.sqrt(max(lam, 0.0))), w / n))
    weighted.sort(key=lambda p: -p[0])
    breakpoints = []
    t = 0.0
    for s, mass in weighted:
        breakpoints.append((t, s))
        t += mass
    return SingularValueFunction(breakpoints=tuple(breakpoints))
