import numpy as np
import pytest

from vnlab.algebra import BlockAlgebra
from vnlab.linalg import op_norm


def rand_complex(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def rand_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rand_complex(rng, n)
    return (g + g.conj().T) / 2.0


def rand_skew(rng: np.random.Generator, n: int, unit_norm: bool = False) -> np.ndarray:
    g = rand_complex(rng, n)
    s = (g - g.conj().T) / 2.0
    return s / op_norm(s) if unit_norm else s


def rand_member(rng: np.random.Generator, alg: BlockAlgebra) -> np.ndarray:
    parts = [rand_complex(rng, n) for n, _ in alg.blocks]
    return alg.member_from_blocks(parts)


def rand_psd_member(rng: np.random.Generator, alg: BlockAlgebra) -> np.ndarray:
    parts = []
    for n, _ in alg.blocks:
        g = rand_complex(rng, n)
        parts.append(g @ g.conj().T)
    return alg.member_from_blocks(parts)


def rand_hermitian_member(rng: np.random.Generator, alg: BlockAlgebra) -> np.ndarray:
    parts = [rand_hermitian(rng, n) for n, _ in alg.blocks]
    return alg.member_from_blocks(parts)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
