"""Benchmark the mod-p matrix kernels: jitted loops vs the numpy fallback.

Runs matrix multiplication and row reduction at a few sizes, checks that the
two implementations agree entrywise, and prints a timing table.  Usage:

    python benchmarks/bench_kernels.py [--sizes 64,128,256] [--reps 5]
                                       [--p 2] [--seed 0]
"""

import argparse
import time

import numpy as np

from homocat._kernels import (
    fp_matmul_numpy, _fp_matmul_jit, fp_rref_numpy, _fp_rref_jit,
    using_numba,
)


def timeit(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    p = args.p

    if not using_numba():
        print("note: numba unavailable or disabled (HOMOCAT_NO_NUMBA=1); "
              "the 'jit' column runs the same pure-python loops uncompiled")

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<10} {'n':>5} {'numpy (s)':>12} {'jit (s)':>12} "
          f"{'speedup':>8}")
    for n in sizes:
        a = rng.integers(0, p, size=(n, n)).astype(np.int64)
        b = rng.integers(0, p, size=(n, n)).astype(np.int64)

        # warm the jit compile outside the timed region
        _fp_matmul_jit(a[:2, :2], b[:2, :2], p)
        t_np, ref = timeit(lambda: fp_matmul_numpy(a, b, p), args.reps)
        t_jit, got = timeit(lambda: _fp_matmul_jit(a, b, p), args.reps)
        assert np.array_equal(ref, got), "matmul kernels disagree"
        print(f"{'matmul':<10} {n:>5} {t_np:>12.6f} {t_jit:>12.6f} "
              f"{t_np / t_jit:>8.2f}x")

        _fp_rref_jit(a[:2, :2] % p, p)
        t_np, (r_np, piv_np) = timeit(lambda: fp_rref_numpy(a, p), args.reps)
        t_jit, (r_jit, piv_jit) = timeit(
            lambda: _fp_rref_jit(a.copy() % p, p), args.reps)
        assert np.array_equal(r_np, r_jit), "rref kernels disagree"
        assert list(piv_np) == [int(x) for x in piv_jit]
        print(f"{'rref':<10} {n:>5} {t_np:>12.6f} {t_jit:>12.6f} "
              f"{t_np / t_jit:>8.2f}x")


if __name__ == "__main__":
    main()
