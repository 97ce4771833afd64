"""Time evolution: piecewise-constant bilinear flows, the inhomogeneous
first-order solution with its control-response integral, product-formula
limits, and reachable-set sampling.

Conventions: hbar = 1; a ControlSystem stores skew-Hermitian generators
(i times the Hamiltonians), so a segment with coefficients u propagates by
exp(-dt (drift + sum u_j control_j)) and the free flow is U^t = exp(-t drift).
Piecewise-constant coefficient paths are the admissible class here; they are
bounded but not continuous in time, which is all the finite-dimensional
statements need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import check_affiliated
from .config import DEFAULT_TOL, Tolerances
from .errors import BadControl, NotAffiliated, NotMember, QuadratureDiverged
from .lie import ControlSystem
from .linalg import SKEW, as_matrix, eig_hermitian, expm_skew


@dataclass(frozen=True)
class PiecewiseConstantControl:
    times: np.ndarray  # breakpoints 0 = t_0 < ... < t_m = T
    values: np.ndarray  # (m, N) coefficients per segment
    bound: float

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def segments(self) -> int:
        return self.values.shape[0]


def make_pwc_control(
    times: Sequence[float], values: np.ndarray, bound: float
) -> PiecewiseConstantControl:
    times = np.asarray(times, dtype=np.float64)
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if times.ndim != 1 or times.size < 2 or times[0] != 0.0:
        raise BadControl("breakpoints must start at 0 and contain the horizon")
    if np.any(np.diff(times) <= 0):
        raise BadControl("breakpoints must be strictly increasing")
    if values.shape[0] != times.size - 1:
        raise BadControl("one coefficient vector per segment required")
    if values.size and float(np.max(np.abs(values))) > bound + 1e-12:
        raise BadControl("coefficients exceed the admissibility bound")
    return PiecewiseConstantControl(times=times, values=values, bound=float(bound))


def extend_with_zero(ctrl: PiecewiseConstantControl, horizon: float) -> PiecewiseConstantControl:
    """Append a zero-coefficient segment up to a later horizon."""
    if horizon <= ctrl.horizon:
        raise BadControl("extension horizon must exceed the current one")
    times = np.append(ctrl.times, horizon)
    values = np.vstack([ctrl.values, np.zeros((1, ctrl.values.shape[1]))])
    return PiecewiseConstantControl(times=times, values=values, bound=ctrl.bound)


def _check_unit(xi: np.ndarray, tol: Tolerances) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.complex128)
    if abs(np.linalg.norm(xi) - 1.0) > tol.unit_vector:
        raise BadControl("initial state must be a unit vector")
    return xi


def propagate_pwc(
    sys: ControlSystem,
    ctrl: PiecewiseConstantControl,
    xi0: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Exact bilinear flow of a piecewise-constant control on a unit state."""
    xi = _check_unit(xi0, tol)
    if ctrl.values.shape[1] != len(sys.controls):
        raise BadControl("coefficient count must match the number of controls")
    for seg in range(ctrl.segments):
        dt = float(ctrl.times[seg + 1] - ctrl.times[seg])
        gen = sys.drift + sum(
            float(u) * c for u, c in zip(ctrl.values[seg], sys.controls)
        )
        unitary = expm_skew(-dt * gen, tol=tol)
        if not check_affiliated(unitary, sys.algebra, tol=tol).verdict:
            raise NotAffiliated("segment unitary escaped the algebra")
        xi = unitary @ xi
    return xi


def segment_unitary_product(
    sys: ControlSystem, ctrl: PiecewiseConstantControl, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """The full propagator of a piecewise-constant control."""
    out = np.eye(sys.dim, dtype=np.complex128)
    for seg in range(ctrl.segments):
        dt = float(ctrl.times[seg + 1] - ctrl.times[seg])
        gen = sys.drift + sum(
            float(u) * c for u, c in zip(ctrl.values[seg], sys.controls)
        )
        out = expm_skew(-dt * gen, tol=tol) @ out
    return out


class _FreeFlow:
    """U^t = exp(-t drift) applied through one spectral decomposition."""

    def __init__(self, drift: np.ndarray, tol: Tolerances):
        dec = eig_hermitian(drift, kind=SKEW, tol=tol)
        self._u = dec.unitary
        self._uh = dec.unitary.conj().T
        self._w = dec.eigenvalues

    def apply(self, t: float, vec: np.ndarray) -> np.ndarray:
        return self._u @ (np.exp(-1j * t * self._w) * (self._uh @ vec))


def _simpson_response(
    sys: ControlSystem,
    flow: _FreeFlow,
    v_path: Callable[[float], np.ndarray],
    xi0: np.ndarray,
    horizon: float,
    nodes: int,
    tol: Tolerances,
) -> np.ndarray:
    ts = np.linspace(0.0, horizon, nodes)
    h = ts[1] - ts[0]
    weights = np.ones(nodes)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    acc = np.zeros_like(np.asarray(xi0, dtype=np.complex128))
    for w, s in zip(weights, ts):
        v = as_matrix(v_path(float(s)))
        if sys.algebra.member_defect(v) > tol.membership:
            raise NotMember(f"path value at t={s:.6g} is not a member of the algebra")
        acc = acc + w * flow.apply(horizon - s, v @ flow.apply(s, xi0))
    return acc * (h / 3.0)


@dataclass(frozen=True)
class BornTrajectory:
    final_state: np.ndarray
    quadrature_nodes: int
    estimated_error: float


def control_response(
    sys: ControlSystem,
    v_path: Callable[[float], np.ndarray],
    xi0: np.ndarray,
    horizon: float,
    nodes: int,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """The control-to-state integral int_0^T U^{T-s} V(s) U^s xi0 ds.

    Affine in the path on a fixed grid; composite Simpson quadrature.
    """
    return born_solution(sys, v_path, xi0, horizon, nodes, tol=tol, _response_only=True).final_state


def born_solution(
    sys: ControlSystem,
    v_path: Callable[[float], np.ndarray],
    xi0: np.ndarray,
    horizon: float,
    nodes: int,
    tol: Tolerances = DEFAULT_TOL,
    _response_only: bool = False,
) -> BornTrajectory:
    """First-order inhomogeneous solution U^T xi0 + response integral.

    The error estimate is the two-grid Richardson difference of the integral;
    QuadratureDiverged is raised when a further node doubling grows the
    difference instead of shrinking it.
    """
    if nodes < 3 or nodes % 2 == 0:
        raise ValueError("nodes must be odd and at least 3")
    xi = _check_unit(xi0, tol)
    flow = _FreeFlow(sys.drift, tol)
    base = _simpson_response(sys, flow, v_path, xi, horizon, nodes, tol)
    doubled = _simpson_response(sys, flow, v_path, xi, horizon, 2 * nodes - 1, tol)
    redoubled = _simpson_response(sys, flow, v_path, xi, horizon, 4 * nodes - 3, tol)
    d1 = float(np.linalg.norm(doubled - base))
    d2 = float(np.linalg.norm(redoubled - doubled))
    if d2 > d1 + 1e-12 * max(1.0, float(np.linalg.norm(base))):
        raise QuadratureDiverged(
            f"two-grid difference grew from {d1:.3e} to {d2:.3e} under refinement"
        )
    final = base if _response_only else flow.apply(horizon, xi) + base
    return BornTrajectory(final_state=final, quadrature_nodes=nodes, estimated_error=d1 / 15.0)


def trotter_product(a: np.ndarray, b: np.ndarray, t: float, n: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """(e^{ta/n} e^{tb/n})^n for skew-Hermitian a, b; first-order in 1/n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    step = expm_skew(t * as_matrix(a) / n, tol=tol) @ expm_skew(t * as_matrix(b) / n, tol=tol)
    return np.linalg.matrix_power(step, n)


def commutator_product(a: np.ndarray, b: np.ndarray, t: float, n: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Group-commutator product converging to e^{t[a,b]} for skew a, b.

    Uses step width sqrt(t)/n raised to the n^2-th power, so each factor
    contributes t/n^2 of the commutator and the error decays like 1/n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if t <= 0:
        raise ValueError("t must be positive")
    s = np.sqrt(t) / n
    ea = expm_skew(s * as_matrix(a), tol=tol)
    eb = expm_skew(s * as_matrix(b), tol=tol)
    step = ea.conj().T @ eb.conj().T @ ea @ eb
    return np.linalg.matrix_power(step, n * n)


@dataclass(frozen=True)
class ReachableSample:
    states: tuple[np.ndarray, ...]
    controls: tuple[PiecewiseConstantControl, ...]
    all_unit_norm: bool
    all_affiliated: bool
    max_affiliation_residual: float


def sample_reachable(
    sys: ControlSystem,
    xi0: np.ndarray,
    horizon: float,
    bound: float,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
) -> ReachableSample:
    """Endpoints of random admissible piecewise-constant controls.

    Per sample: segment count uniform in 1..8 over an equal-length grid,
    coefficients uniform in [-bound, bound]; deterministic given the seed.
    Every endpoint is (affiliated unitary) applied to xi0.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    xi = _check_unit(xi0, tol)
    rng = np.random.default_rng(seed)
    n_controls = len(sys.controls)
    states, controls = [], []
    worst = 0.0
    unit_ok = True
    for _ in range(samples):
        segs = int(rng.integers(1, 9))
        values = rng.uniform(-bound, bound, size=(segs, n_controls)) if bound > 0 else np.zeros((segs, n_controls))
        ctrl = make_pwc_control(np.linspace(0.0, horizon, segs + 1), values, bound)
        unitary = segment_unitary_product(sys, ctrl, tol=tol)
        cert = check_affiliated(unitary, sys.algebra, tol=tol)
        worst = max(worst, cert.residual)
        state = unitary @ xi
        unit_ok = bool(unit_ok and abs(np.linalg.norm(state) - 1.0) <= 1e-9)
        states.append(state)
        controls.append(ctrl)
    return ReachableSample(
        states=tuple(states),
        controls=tuple(controls),
        all_unit_norm=unit_ok,
        all_affiliated=bool(worst <= tol.affiliation),
        max_affiliation_residual=worst,
    )
