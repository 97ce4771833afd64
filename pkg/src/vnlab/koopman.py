"""Truncated Koopman models for torus rotation flows.

A rotation flow with frequency vector alpha acts on Fourier modes indexed by
xi in {-K..K}^d; the composition unitaries are diagonal with phases
exp(i t alpha.xi) and their generator is the diagonal skew matrix with rates
alpha.xi. The algebra the group generates is the constant-on-level-set
diagonal algebra, and classical filtrations of the mode set give the
refinement chains used by the drift-approximation sweep.

The sharp cutoff keeps everything diagonal, so truncation never leaks mass
between modes; all structural claims below are about the retained modes with
the normalized counting trace.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .algebra import (
    BlockAlgebra,
    ConditionalExpectation,
    bicommutant_algebra,
    conditional_expectation,
    diagonal_algebra,
)
from .config import DEFAULT_TOL, Tolerances
from .errors import BadCutoff

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TorusModel:
    d: int
    alpha: tuple[float, ...]
    cutoff: int
    indices: tuple[tuple[int, ...], ...]

    @property
    def ambient_dim(self) -> int:
        return len(self.indices)

    def position_of(self, xi: tuple[int, ...]) -> int:
        return self.indices.index(tuple(xi))

    def rates(self) -> np.ndarray:
        a = np.asarray(self.alpha)
        return np.array([float(a @ np.asarray(xi)) for xi in self.indices])

    def to_json(self) -> dict:
        return {"d": self.d, "alpha": list(self.alpha), "K": self.cutoff}


def build_torus_model(d: int, alpha, cutoff: int) -> TorusModel:
    """Lexicographic mode enumeration of {-K..K}^d for a rotation flow."""
    if cutoff < 1:
        raise BadCutoff("cutoff K must be at least 1")
    if d < 1:
        raise BadCutoff("dimension d must be at least 1")
    alpha = tuple(float(x) for x in np.atleast_1d(alpha))
    if len(alpha) != d or not all(np.isfinite(alpha)):
        raise ValueError("alpha must be a finite vector of length d")
    indices = tuple(itertools.product(range(-cutoff, cutoff + 1), repeat=d))
    return TorusModel(d=d, alpha=alpha, cutoff=cutoff, indices=indices)


def model_algebra(model: TorusModel) -> BlockAlgebra:
    """Full diagonal algebra on the retained modes, uniform trace weights."""
    return diagonal_algebra(model.ambient_dim)


def generator(model: TorusModel) -> np.ndarray:
    """Diagonal skew generator with rate alpha.xi at mode xi."""
    return np.diag(1j * model.rates())


def koopman_unitary(model: TorusModel, t: float) -> np.ndarray:
    """Composition unitary U^t = diag(exp(i t alpha.xi))."""
    return np.diag(np.exp(1j * t * model.rates()))


def default_time_samples(model: TorusModel) -> tuple[float, ...]:
    """Generic sample times {1, sqrt(2)} scaled into the collision-free range."""
    scale = float(np.max(np.abs(model.rates()), initial=0.0))
    base = (1.0, float(np.sqrt(2.0)))
    if scale == 0.0:
        return base
    return tuple(t / scale for t in base)


def _has_collision(rates: np.ndarray, samples, tol: Tolerances) -> bool:
    spread = float(np.max(np.abs(rates), initial=0.0))
    sep = tol.phase_collision_rel * max(1.0, spread)
    for i in range(rates.size):
        for j in range(i + 1, rates.size):
            if abs(rates[i] - rates[j]) <= sep:
                continue  # genuinely equal rates are allowed to share phases
            split = max(
                abs(np.exp(1j * t * rates[i]) - np.exp(1j * t * rates[j])) for t in samples
            )
            if split <= tol.phase_collision_rel:
                return True
    return False


def koopman_algebra(
    model: TorusModel,
    t_samples=None,
    tol: Tolerances = DEFAULT_TOL,
) -> BlockAlgebra:
    """Bicommutant of sampled composition unitaries.

    For rates with pairwise-distinct values this is the full diagonal
    algebra; equal rates merge into scalar blocks with multiplicity. Samples
    colliding mod 2pi are rescaled automatically (logged).
    """
    if t_samples is None:
        samples = list(default_time_samples(model))
    else:
        samples = [float(t) for t in t_samples]
        if not samples:
            raise ValueError("t_samples must be nonempty")
    rates = model.rates()
    for attempt in range(8):
        if not _has_collision(rates, samples, tol):
            break
        samples = [t * 0.6180339887498949 for t in samples]
        logger.info("phase collision among samples; rescaled to %s", samples)
    return bicommutant_algebra([koopman_unitary(model, t) for t in samples], tol=tol)


def filtration_expectation(model: TorusModel, cells) -> ConditionalExpectation:
    """Conditional expectation of the diagonal mode algebra averaging over
    the given cells of mode positions (uniform weights)."""
    return conditional_expectation(model_algebra(model), cells)


def dyadic_filtration(model: TorusModel, levels: int) -> list[ConditionalExpectation]:
    """Sign-pure dyadic refinement chain on the rate-sorted modes.

    Zero-rate modes stay isolated; the negative and positive rate runs are
    bisected once more per level; the final level is the identity partition.
    Each level refines the previous one, as the sweep requires.
    """
    if levels < 1:
        raise ValueError("levels must be at least 1")
    rates = model.rates()
    order = np.argsort(rates, kind="stable")
    spread = float(np.max(np.abs(rates), initial=0.0))
    zero_cut = 1e-12 * max(1.0, spread)
    zeros = [int(i) for i in order if abs(rates[i]) <= zero_cut]
    neg = [int(i) for i in order if rates[i] < -zero_cut]
    pos = [int(i) for i in order if rates[i] > zero_cut]
    chain = []
    for level in range(1, levels + 1):
        cells: list[list[int]] = [[z] for z in zeros]
        if level == levels:
            cells += [[i] for i in neg] + [[i] for i in pos]
        else:
            pieces = 2 ** (level - 1)
            for run in (neg, pos):
                if run:
                    cells += [list(map(int, c)) for c in np.array_split(np.array(run), min(pieces, len(run)))]
        chain.append(filtration_expectation(model, cells))
    return chain
