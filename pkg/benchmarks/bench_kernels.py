#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback path.

Runs both implementations of each hot kernel in-process (the numpy twins
are importable regardless of the STACKCOST_DISABLE_NUMBA flag), checks
they agree, and times the end-to-end metal-layer matrix on whichever path
the flag selected.

Usage:
    python benchmarks/bench_kernels.py [--repeats N]
    STACKCOST_DISABLE_NUMBA=1 python benchmarks/bench_kernels.py
"""

import argparse
import math
import time

import numpy as np

from stackcost import kernels
from stackcost.pipeline import table1_matrix
from stackcost.techlib import builtin_library


def timeit(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_moment_integrals(repeats):
    cases = [(1e6, 0.6), (5e6, 0.658), (2e7, 0.658)]
    print("adaptive Gauss-Kronrod moment integrals (full domain, both moments):")
    for n, p in cases:
        sn = math.sqrt(n)

        def run_dispatched():
            kernels.moment_integral(1.0, 2 * sn, sn, p, 0)
            kernels.moment_integral(1.0, 2 * sn, sn, p, 1)

        def run_numpy():
            kernels._adaptive_numpy(1.0, 2 * sn, sn, p, 0, 1e-10)
            kernels._adaptive_numpy(1.0, 2 * sn, sn, p, 1, 1e-10)

        a = kernels.moment_integral(1.0, 2 * sn, sn, p, 1)
        b = kernels._adaptive_numpy(1.0, 2 * sn, sn, p, 1, 1e-10)
        assert abs(a - b) <= 1e-9 * abs(a), (a, b)

        t_disp = timeit(run_dispatched, repeats)
        t_np = timeit(run_numpy, repeats)
        label = "numba" if kernels.USING_NUMBA else "numpy"
        print(
            f"  N={n:<8.0e} p={p}: {label} {t_disp * 1e3:8.3f} ms   "
            f"numpy {t_np * 1e3:8.3f} ms   ratio {t_np / t_disp:6.1f}x"
        )


def bench_pair_counts(repeats):
    print("exhaustive grid pair enumeration:")
    for side in (16, 32, 64):
        a = kernels.grid_pair_counts(side)
        b = kernels._pair_counts_numpy(side)
        assert np.array_equal(a, b)
        t_disp = timeit(lambda: kernels.grid_pair_counts(side), repeats)
        t_np = timeit(lambda: kernels._pair_counts_numpy(side), repeats)
        label = "numba" if kernels.USING_NUMBA else "numpy"
        print(
            f"  side={side:<4d}: {label} {t_disp * 1e3:8.3f} ms   "
            f"numpy {t_np * 1e3:8.3f} ms   ratio {t_np / t_disp:6.1f}x"
        )


def bench_pipeline(repeats):
    library = builtin_library(calibrated=True)
    t = timeit(lambda: table1_matrix(library), max(repeats // 3, 1))
    label = "numba" if kernels.USING_NUMBA else "numpy fallback"
    print(f"end-to-end 12-entry metal-layer matrix ({label}): {t:.3f} s")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"numba path active: {kernels.USING_NUMBA} "
          f"(set {kernels.ENV_FLAG}=1 to force the numpy fallback)")
    kernels.warm_up()
    bench_moment_integrals(args.repeats)
    bench_pair_counts(args.repeats)
    bench_pipeline(args.repeats)


if __name__ == "__main__":
    main()
