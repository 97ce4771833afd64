"""Centralized numeric tolerances.

Every threshold used by the library lives in one frozen record so that a
whole run resolves a single, reportable tolerance set.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class Tolerances:
    # symmetry / structure checks (relative to max(1, ||A||_F))
    hermitian_check: float = 1e-8
    # eigensolver: off-diagonal Frobenius target relative to ||A||_F, sweep cap
    jacobi_offdiag_rel: float = 1e-12
    jacobi_max_sweeps: int = 100
    # decomposition contracts
    unitary_check: float = 1e-10
    reconstruct_rel: float = 1e-9
    # resolvent: distance of z to the spectrum, relative to max(1, spectral radius)
    spectrum_hit: float = 1e-12
    # nullspace / commutant residual (absolute, on unit-normalized maps)
    nullspace_residual: float = 1e-8
    # algebra membership and affiliation verdicts
    affiliation: float = 1e-8
    membership: float = 1e-8
    weights_sum: float = 1e-12
    # block detection: support-graph / eigenvalue-cluster gap (relative)
    block_gap_rel: float = 1e-7
    # Lie closure admission (relative to candidate norm) and closure residual;
    # candidates below the zero floor are bracket round-off, not directions
    lie_admission: float = 1e-7
    lie_closure_residual: float = 1e-6
    lie_zero_floor: float = 1e-10
    # spectral clamp overshoot allowed before inversion of the compactification
    clamp_overshoot: float = 1e-6
    # unit-vector normalization checks
    unit_vector: float = 1e-10
    # phase-collision detection for sampled unitary groups (relative)
    phase_collision_rel: float = 1e-9

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = Tolerances()
