#!/usr/bin/env python3
"""Time each hot kernel on both backends (numba @njit vs pure numpy).

Sizes mirror the default workload: ~1100 training candidates, 8 features,
32 clusters. The numba twins are warmed once so JIT compilation is not
timed. Run as ``python3 benchmarks/bench_kernels.py``.
"""

import time

import numpy as np

from aldisplay import kernels

N, D, K = 1100, 8, 32
REPEATS = 20


def timeit(fn, *args, repeats=REPEATS):
    fn(*args)  # warmup (JIT compile / cache touch)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def main():
    rng = np.random.default_rng(0)
    feats = rng.standard_normal((N, D))
    centers = rng.standard_normal((K, D))
    xb = np.hstack([feats, np.ones((N, 1))])
    y = rng.integers(0, 2, N).astype(float)
    static = rng.standard_normal(N)
    assign = rng.integers(0, K, N)
    mind = np.sqrt(((feats - feats[0]) ** 2).sum(axis=1))

    cases = [
        (
            "sqdist_matrix (%dx%d vs %d)" % (N, D, K),
            kernels.sqdist_matrix_numpy,
            kernels.sqdist_matrix_numba,
            (feats, centers),
        ),
        (
            "logreg_fit (300 epochs)",
            kernels.logreg_fit_numpy,
            kernels.logreg_fit_numba,
            (xb, y, 0.1, 1e-3, 0.0, 300),
        ),
        (
            "relevance_iterate (100 passes)",
            kernels.relevance_iterate_numpy,
            kernels.relevance_iterate_numba,
            (static, assign, K, 1.0, 0.0, 100),
        ),
        (
            "maxmin_greedy (64 picks)",
            kernels.maxmin_greedy_numpy,
            kernels.maxmin_greedy_numba,
            (feats, mind, 64),
        ),
    ]

    print(f"numba available: {kernels.NUMBA_AVAILABLE}; active backend: {kernels.backend()}")
    print(f"{'kernel':<34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, np_fn, nb_fn, args in cases:
        t_np = timeit(np_fn, *args)
        if kernels.NUMBA_AVAILABLE:
            t_nb = timeit(nb_fn, *args)
            print(
                f"{name:<34} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                f"{t_np / t_nb:>7.1f}x"
            )
        else:
            print(f"{name:<34} {t_np * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")


if __name__ == "__main__":
    main()
