"""Benchmark the Jacobi eigensolver backends (numba jit vs pure numpy).

Usage: python benchmarks/bench_eig.py [--dims 16,32,64,128] [--repeats 3]

The numba path is warmed once before timing so JIT compilation does not
pollute the numbers.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vnlab.backends import run_jacobi

try:
    import numba  # noqa: F401

    BACKENDS = ("numpy", "numba")
except ImportError:  # pragma: no cover
    BACKENDS = ("numpy",)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2.0


def bench(dims: list[int], repeats: int) -> None:
    rng = np.random.default_rng(0)
    if "numba" in BACKENDS:
        run_jacobi(random_hermitian(rng, 8), 100, 1e-12, backend="numba")  # warm the jit
    print(f"{'dim':>6} " + " ".join(f"{b:>12}" for b in BACKENDS) + f" {'speedup':>9}")
    for n in dims:
        mats = [random_hermitian(rng, n) for _ in range(repeats)]
        timings = {}
        for backend in BACKENDS:
            t0 = time.perf_counter()
            for h in mats:
                w, v, sweeps = run_jacobi(h, 100, 1e-12 * np.linalg.norm(h), backend=backend)
                assert sweeps >= 0
            timings[backend] = (time.perf_counter() - t0) / repeats
        cols = " ".join(f"{timings[b] * 1e3:>10.2f}ms" for b in BACKENDS)
        speedup = timings["numpy"] / timings[BACKENDS[-1]]
        print(f"{n:>6} {cols} {speedup:>8.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", default="16,32,64,128", type=str)
    parser.add_argument("--repeats", default=3, type=int)
    args = parser.parse_args()
    bench([int(d) for d in args.dims.split(",")], args.repeats)


if __name__ == "__main__":
    main()
