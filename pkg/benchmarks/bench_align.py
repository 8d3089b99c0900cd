#!/usr/bin/env python3
"""Benchmark the numba alignment kernel against the pure-numpy fallback.

The fallback is exercised in-process by calling the private numpy path
directly, so a single run compares both implementations on identical inputs.
Run with FALARM_NO_NUMBA=1 to confirm the public entry point matches the
fallback timings.
"""
import argparse
import time

import numpy as np

from falarm.kernels import NUMBA_ENABLED, _align_counts_numpy, align_counts


def bench(fn, pairs, repeats):
    # warm-up (also triggers numba JIT compilation)
    fn(*pairs[0])
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for ref, hyp in pairs:
            fn(ref, hyp)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument(
        "--lengths", type=int, nargs="+", default=[10, 50, 200, 1000]
    )
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"numba enabled: {NUMBA_ENABLED}")
    print(f"{'length':>8} {'numpy (s)':>12} {'public (s)':>12} {'speedup':>8}")
    for length in args.lengths:
        pairs = [
            (
                rng.integers(0, 50, size=length).astype(np.int32),
                rng.integers(0, 50, size=length).astype(np.int32),
            )
            for _ in range(args.pairs)
        ]
        for ref, hyp in pairs[:10]:
            assert align_counts(ref, hyp) == _align_counts_numpy(ref, hyp)
        t_numpy = bench(_align_counts_numpy, pairs, args.repeats)
        t_public = bench(align_counts, pairs, args.repeats)
        print(
            f"{length:>8} {t_numpy:>12.4f} {t_public:>12.4f} "
            f"{t_numpy / t_public:>8.2f}x"
        )


if __name__ == "__main__":
    main()
