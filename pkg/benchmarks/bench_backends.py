#!/usr/bin/env python3
"""Benchmark the compiled Jacobi kernel against the NumPy fallback.

The eigensolver is the hot loop of every covariance refit, so this is the
one place a compiled kernel pays off; numpy.linalg.eigh is included as a
reference point. Agreement between the two backends is checked before
timing.

Usage: python benchmarks/bench_backends.py [--sizes 16,32,64,128] [--repeats 5]
"""

import argparse
import time

import numpy as np

from covscatter import _jacobi_py

try:
    from covscatter import _jacobi_cy
except ImportError:
    _jacobi_cy = None


def random_spd(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    m = a @ a.T / n + 0.05 * np.eye(n)
    return (m + m.T) / 2.0


def run_backend(module, matrix):
    work = np.ascontiguousarray(matrix.copy())
    vectors = np.ascontiguousarray(np.eye(matrix.shape[0]))
    sweeps = module.jacobi_cycle(work, vectors, 1e-12 * np.linalg.norm(matrix), 100)
    if sweeps < 0:
        raise RuntimeError(f"{module.BACKEND} backend did not converge")
    return np.diagonal(work).copy(), vectors


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="16,32,64,128")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _jacobi_cy is None:
        print("compiled backend not built; timing the NumPy fallback only")

    header = f"{'N':>5} {'numpy-jacobi':>14} {'cython-jacobi':>14} {'speedup':>9} {'lapack-eigh':>13}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        matrix = random_spd(n, n)
        t_py = time_call(lambda: run_backend(_jacobi_py, matrix), args.repeats)
        if _jacobi_cy is not None:
            values_py, _ = run_backend(_jacobi_py, matrix)
            values_cy, _ = run_backend(_jacobi_cy, matrix)
            agreement = np.max(np.abs(np.sort(values_py) - np.sort(values_cy)))
            if agreement > 1e-10 * max(1.0, np.linalg.norm(matrix)):
                raise RuntimeError(f"backends disagree at N={n}: {agreement:.3e}")
            t_cy = time_call(lambda: run_backend(_jacobi_cy, matrix), args.repeats)
            cy_col, speedup = f"{t_cy * 1e3:11.3f} ms", f"{t_py / t_cy:8.1f}x"
        else:
            cy_col, speedup = f"{'-':>14}", f"{'-':>9}"
        t_ref = time_call(lambda: np.linalg.eigh(matrix), args.repeats)
        print(f"{n:>5} {t_py * 1e3:11.3f} ms {cy_col} {speedup} {t_ref * 1e3:10.3f} ms")


if __name__ == "__main__":
    main()
