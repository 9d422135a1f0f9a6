#!/usr/bin/env python3
"""Timing comparison of the sample-recursion backends.

The reservoir update is an inherently sequential recursion (each sample
feeds back d steps later), so the numpy fallback advances it in blocks of
d samples while the numba kernel runs the plain loop. Both produce
bitwise-identical streams; this script reports how much the compiled loop
buys at several delay lengths.

Usage: python3 benchmarks/bench_kernels.py [n_samples]
"""

import sys
import time

import numpy as np

from delayrc import _kernels


def bench(fn, J, d, history, repeats=5):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(J, d, 0.9, 0.983, 0.85, 0.9, 0.63, history)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    rng = np.random.default_rng(0)
    J = rng.uniform(-1.0, 1.0, n)

    if _kernels.HAVE_NUMBA:
        # trigger compilation outside the timed region
        _kernels.evolve_samples_numba(J[:64], 2, 0.9, 0.983, 0.85, 0.9, 0.63,
                                      np.zeros(2))
    else:
        print("numba not importable; showing the numpy path only")

    print(f"sample recursion, n={n:,} samples")
    print(f"{'d':>6} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}  match")
    for d in (1, 14, 50, 200, 1000):
        history = np.zeros(d)
        t_np, out_np = bench(_kernels.evolve_samples_numpy, J, d, history)
        if _kernels.HAVE_NUMBA:
            t_nb, out_nb = bench(_kernels.evolve_samples_numba, J, d, history)
            same = np.array_equal(out_np, out_nb)
            print(f"{d:>6} {t_np * 1e3:>12.1f} {t_nb * 1e3:>12.1f} "
                  f"{t_np / t_nb:>8.1f}x  {'bitwise' if same else 'DIFFER'}")
        else:
            print(f"{d:>6} {t_np * 1e3:>12.1f} {'-':>12} {'-':>9}")

    dde_n = 200_000
    pre = np.zeros(dde_n + 1)
    args = (dde_n, 1e-3, 1000.0, 0.01, 0.28, 0.983, 1.0, 0.0, pre, 0.1)
    t0 = time.perf_counter()
    v_np = _kernels.dde_euler_loop(*args)
    t_np = time.perf_counter() - t0
    if _kernels.HAVE_NUMBA:
        _kernels.dde_euler_numba(1000, *args[1:])
        t0 = time.perf_counter()
        v_nb = _kernels.dde_euler_numba(*args)
        t_nb = time.perf_counter() - t0
        same = np.array_equal(v_np, v_nb)
        print(f"\ndde euler, {dde_n:,} steps: numpy {t_np * 1e3:.1f} ms, "
              f"numba {t_nb * 1e3:.1f} ms, speedup {t_np / t_nb:.1f}x, "
              f"{'bitwise' if same else 'DIFFER'}")
    else:
        print(f"\ndde euler, {dde_n:,} steps: numpy {t_np * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
