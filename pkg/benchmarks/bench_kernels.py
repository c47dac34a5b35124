"""Benchmark the split-search kernel: numba JIT path vs pure-numpy fallback.

Run with:

    python3 benchmarks/bench_kernels.py [--rows 100000] [--repeats 20]

The numpy fallback (the one selected by FARECAST_DISABLE_NUMBA=1) is imported
directly so both paths can be timed in one process. The script also times a
full model fit under each kernel to show the end-to-end effect.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from farecast import gbt
from farecast.gbt.kernels import _scan_split_np, numba_enabled

if numba_enabled():
    from farecast.gbt.kernels import _scan_split_nb


def make_instance(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    values = np.sort(rng.normal(size=n))
    grads = rng.normal(scale=0.5, size=n)
    hess = np.full(n, 0.25)
    return values, grads, hess, float(grads.sum()), float(hess.sum())


def time_kernel(fn, args, repeats: int) -> float:
    fn(*args)  # warm-up (numba JIT compile on first call)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def time_training(n: int, seed: int, repeats: int) -> float:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 8))
    y = (X[:, 0] + 0.5 * X[:, 1] * X[:, 2] + rng.normal(scale=0.5, size=n) > 0).astype(float)
    params = gbt.GbtParams(n_trees=10, max_depth=4, seed=1)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        gbt.train(X, y, params)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=100_000)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    values, grads, hess, g_tot, h_tot = make_instance(args.rows)
    kernel_args = (values, grads, hess, 0.7, 0.4, 1.0, g_tot + 0.7, h_tot + 0.4)

    t_np = time_kernel(_scan_split_np, kernel_args, args.repeats)
    print(f"kernel scan, {args.rows} rows (best of {args.repeats}):")
    print(f"  numpy fallback : {t_np * 1e3:8.3f} ms")
    if numba_enabled():
        t_nb = time_kernel(_scan_split_nb, kernel_args, args.repeats)
        print(f"  numba njit     : {t_nb * 1e3:8.3f} ms   ({t_np / t_nb:.1f}x faster)")
        out_np = _scan_split_np(*kernel_args)
        out_nb = _scan_split_nb(*kernel_args)
        assert abs(out_np[0] - out_nb[0]) <= 1e-9 and out_np[1] == out_nb[1], (
            "kernel paths disagree"
        )
        print("  agreement      : identical best split on this instance")
    else:
        print("  numba disabled (FARECAST_DISABLE_NUMBA set); only the fallback timed")

    t_fit = time_training(20_000, seed=3, repeats=3)
    label = "numba" if numba_enabled() else "numpy"
    print(f"full 10-tree fit, 20000x8 ({label} path): {t_fit * 1e3:8.1f} ms")


if __name__ == "__main__":
    main()
