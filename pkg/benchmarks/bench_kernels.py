#!/usr/bin/env python3
"""Compare the vectorized and compiled budget-search kernels.

Builds Zipf-like synthetic corpora of increasing size, verifies both
backends return identical results, and reports per-call timings.

    python3 benchmarks/bench_kernels.py [--sizes 100,1000,100000] [--repeats 50]
"""

import argparse
import time

import numpy as np

from pwsignal import _kernels


def synthetic_instance(n_classes: int, rng: np.random.Generator):
    ranks = np.arange(1, n_classes + 1, dtype=np.float64)
    prob = 1.0 / ranks**1.07
    prob /= prob @ np.ones_like(prob)
    cnt = rng.integers(1, 50, size=n_classes).astype(np.float64)
    prob = np.sort(prob)[::-1].copy()
    return prob, cnt


def time_kernel(fn, prob, cnt, v, repeats: int) -> float:
    fn(prob, cnt, v, 1.0, 1e-9)  # warm up (compilation, caches)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(prob, cnt, v, 1.0, 1e-9)
    return (time.perf_counter() - start) / repeats


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,1000,10000,100000",
                        help="comma-separated class counts")
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    compiled = _kernels.best_budget_numba
    print(f"compiled kernel available: {compiled is not None} "
          f"(active backend: {'compiled' if _kernels.using_numba() else 'numpy'})")
    header = f"{'classes':>9}  {'numpy':>12}  {'compiled':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))

    for n in sizes:
        prob, cnt = synthetic_instance(n, rng)
        v = float(rng.uniform(0.5, 5.0) * n)

        t_numpy = time_kernel(_kernels.best_budget_numpy, prob, cnt, v, args.repeats)
        if compiled is not None:
            t_comp = time_kernel(compiled, prob, cnt, v, args.repeats)
            a = _kernels.best_budget_numpy(prob, cnt, v, 1.0, 1e-9)
            b = compiled(prob, cnt, v, 1.0, 1e-9)
            if a != b:
                raise AssertionError(f"backends disagree at n={n}: {a} vs {b}")
            print(f"{n:>9}  {t_numpy * 1e6:>10.1f}us  {t_comp * 1e6:>10.1f}us  "
                  f"{t_numpy / t_comp:>7.2f}x")
        else:
            print(f"{n:>9}  {t_numpy * 1e6:>10.1f}us  {'n/a':>12}  {'n/a':>8}")

    return 0


if __name__ == "__main__":
    raise SystemExit(main())
