import numpy as np
import pytest

from conftest import rand_hermitian
from vnlab.backends import active_backend, run_jacobi

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def test_env_flag_selects_backend(monkeypatch):
    monkeypatch.setenv("VNLAB_BACKEND", "numpy")
    assert active_backend() == "numpy"
    monkeypatch.delenv("VNLAB_BACKEND")
    assert active_backend() in ("numba", "numpy")


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree(rng):
    for n in (2, 5, 16, 33):
        h = rand_hermitian(rng, n)
        w1, v1, s1 = run_jacobi(h, 100, 1e-12 * np.linalg.norm(h), backend="numpy")
        w2, v2, s2 = run_jacobi(h, 100, 1e-12 * np.linalg.norm(h), backend="numba")
        assert s1 >= 0 and s2 >= 0
        assert np.allclose(np.sort(w1), np.sort(w2), atol=1e-10 * max(1, np.linalg.norm(h)))
        for w, v in ((w1, v1), (w2, v2)):
            assert np.linalg.norm((v * w) @ v.conj().T - h) <= 1e-10 * max(1, np.linalg.norm(h))


def test_eig_respects_env_flag(monkeypatch, rng):
    from vnlab.linalg import eig_hermitian

    h = rand_hermitian(rng, 8)
    monkeypatch.setenv("VNLAB_BACKEND", "numpy")
    d1 = eig_hermitian(h)
    monkeypatch.setenv("VNLAB_BACKEND", "numba" if HAVE_NUMBA else "numpy")
    d2 = eig_hermitian(h)
    assert np.allclose(d1.eigenvalues, d2.eigenvalues, atol=1e-10)
