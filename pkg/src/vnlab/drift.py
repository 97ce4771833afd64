"""Two-parameter approximation of a skew-adjoint drift.

Pipeline: squeeze the spectrum through the bounded odd map
w -> w/(z^2 + w^2) (a resolvent sandwich, range [-1/(2z), 1/(2z)]), compress
with a trace-preserving conditional expectation, then invert the squeeze on
the invertible band via w = (1 + sqrt(1 - 4 z^2 u^2)) / (2 u), with 0 -> 0.
Rates |w| >= z round-trip exactly; |w| < z reflect to z^2/w. Convergence
toward the drift is probed in the strong resolvent sense on a vector set.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import ConditionalExpectation
from .config import DEFAULT_TOL, Tolerances
from .errors import ClampExceeded
from .linalg import SKEW, apply_spectral_function, eig_hermitian, resolvent


@dataclass(frozen=True)
class DriftApproxParams:
    z: float
    expectation: ConditionalExpectation
    probes: tuple[np.ndarray, ...]


def make_params(
    z: float,
    expectation: ConditionalExpectation,
    probes: Sequence[np.ndarray],
    tol: Tolerances = DEFAULT_TOL,
) -> DriftApproxParams:
    if z <= 0:
        raise ValueError("z must be positive")
    probes = tuple(np.asarray(p, dtype=np.complex128) for p in probes)
    if not probes:
        raise ValueError("at least one probe vector required")
    for p in probes:
        if abs(np.linalg.norm(p) - 1.0) > 1e-12:
            raise ValueError("probe vectors must be unit to 1e-12")
    return DriftApproxParams(z=float(z), expectation=expectation, probes=probes)


def standard_probes(dim: int) -> tuple[np.ndarray, ...]:
    return tuple(np.eye(dim, dtype=np.complex128)[:, k] for k in range(dim))


def compactify_spectrum(
    v0: np.ndarray, z: float, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Bounded skew-Hermitian squeeze of a skew-Hermitian drift."""
    if z <= 0:
        raise ValueError("z must be positive")
    dec = eig_hermitian(v0, kind=SKEW, tol=tol)
    return apply_spectral_function(dec, lambda w: 1j * w / (z * z + w * w))


def compress(
    squeezed: np.ndarray, expectation: ConditionalExpectation, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Conditional-expectation compression; a contraction, so the spectrum
    stays inside the squeeze band."""
    return expectation.apply(squeezed, tol=tol)


def invert_compactification(
    c: np.ndarray, z: float, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Invert the squeeze on a skew-Hermitian matrix with rates in the band.

    Rates are clamped to [-1/(2z), 1/(2z)] first; overshoot beyond the clamp
    tolerance raises ClampExceeded. Zero maps to zero.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    band = 1.0 / (2.0 * z)
    dec = eig_hermitian(c, kind=SKEW, tol=tol)
    over = float(np.max(np.abs(dec.eigenvalues), initial=0.0)) - band
    if over > tol.clamp_overshoot:
        raise ClampExceeded(f"rate overshoots the band by {over:.3e}")

    def inverse(u: np.ndarray) -> np.ndarray:
        uu = np.clip(u, -band, band)
        out = np.zeros_like(uu, dtype=np.complex128)
        nz = uu != 0.0
        root = np.sqrt(np.maximum(1.0 - 4.0 * z * z * uu[nz] ** 2, 0.0))
        out[nz] = 1j * (1.0 + root) / (2.0 * uu[nz])
        return out

    return apply_spectral_function(dec, inverse)


def approximate_drift(
    v0: np.ndarray, params: DriftApproxParams, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Squeeze, compress, invert: the two-parameter drift approximation."""
    squeezed = compactify_spectrum(v0, params.z, tol=tol)
    compressed = compress(squeezed, params.expectation, tol=tol)
    return invert_compactification(compressed, params.z, tol=tol)


def resolvent_probe_distance(
    a: np.ndarray, b: np.ndarray, probes: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOL
) -> float:
    """Strong-resolvent distance of two skew-Hermitian matrices on probes:
    max over probes xi of ||(-ia - i)^{-1} xi - (-ib - i)^{-1} xi||."""
    probes = tuple(np.asarray(p, dtype=np.complex128) for p in probes)
    if not probes:
        raise ValueError("at least one probe vector required")
    ra = resolvent(-1j * np.asarray(a, dtype=np.complex128), 1j, tol=tol)
    rb = resolvent(-1j * np.asarray(b, dtype=np.complex128), 1j, tol=tol)
    return max(float(np.linalg.norm((ra - rb) @ p)) for p in probes)


@dataclass(frozen=True)
class SweepResult:
    z_grid: tuple[float, ...]
    distances: np.ndarray  # shape (len(z_grid), chain length), grid order

    def row(self, zi: int) -> np.ndarray:
        return self.distances[zi]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("z,refinement_index,srt_distance\n")
        for zi, z in enumerate(self.z_grid):
            for ri in range(self.distances.shape[1]):
                buf.write(f"{z:.17g},{ri},{self.distances[zi, ri]:.17g}\n")
        return buf.getvalue()


def convergence_sweep(
    v0: np.ndarray,
    z_grid: Sequence[float],
    refinement_chain: Sequence[ConditionalExpectation],
    probes: Sequence[np.ndarray] | None = None,
    tol: Tolerances = DEFAULT_TOL,
    max_workers: int | None = None,
) -> SweepResult:
    """Distance table of the approximation against the drift over a z grid
    (outer) and a refinement chain (inner, ending at the identity
    expectation). Cells are independent; max_workers > 1 evaluates them in a
    thread pool with results gathered in grid order."""
    if not refinement_chain:
        raise ValueError("refinement chain must be nonempty")
    for earlier, later in zip(refinement_chain, refinement_chain[1:]):
        if not later.refines(earlier):
            raise ValueError("each expectation must refine the previous one")
    if not refinement_chain[-1].is_identity:
        raise ValueError("refinement chain must end at the identity expectation")
    v0 = np.asarray(v0, dtype=np.complex128)
    if probes is None:
        probes = standard_probes(v0.shape[0])

    def cell(z: float, expectation: ConditionalExpectation) -> float:
        params = make_params(z, expectation, probes, tol=tol)
        approx = approximate_drift(v0, params, tol=tol)
        return resolvent_probe_distance(approx, v0, probes, tol=tol)

    out = np.zeros((len(z_grid), len(refinement_chain)))
    if max_workers is not None and max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {
                (zi, ri): pool.submit(cell, z, e)
                for zi, z in enumerate(z_grid)
                for ri, e in enumerate(refinement_chain)
            }
        for (zi, ri), fut in futures.items():
            out[zi, ri] = fut.result()
    else:
        for zi, z in enumerate(z_grid):
            for ri, expectation in enumerate(refinement_chain):
                out[zi, ri] = cell(z, expectation)
    return SweepResult(z_grid=tuple(float(z) for z in z_grid), distances=out)
