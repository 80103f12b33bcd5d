"""Compare the numba and pure-numpy kernels on representative sizes.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both modules are imported directly, so the TRANSRATE_DISABLE_NUMBA flag
does not matter here. Numba compile time is excluded by a warm-up call.
"""
import argparse
import time

import numpy as np

from transrate import _kernels_numba as nb
from transrate import _kernels_numpy as npk


def cases():
    r = np.random.default_rng(0)
    X = r.normal(size=(20_000, 256))
    H = r.uniform(size=(200_000, 3))
    x = r.integers(0, 500, 5_000).astype(float)
    y = r.normal(size=5_000)
    w = 1.0 / (np.arange(5_000) + 1.0)
    return [
        ("normalize_rows 20000x256", lambda k: k.normalize_rows(X)),
        ("counter_normals 4M", lambda k: k.counter_normals(np.uint64(7), 4_000_000)),
        ("histogram_cells 200000x3", lambda k: k.histogram_cells(H, H.min(0), H.max(0), 8)),
        ("kendall_counts n=5000", lambda k: k.kendall_counts(x, y)),
        ("weighted_pair_terms n=5000", lambda k: k.weighted_pair_terms(x, y, w)),
    ]


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<30}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for name, call in cases():
        a = best_of(lambda: call(npk), args.repeat)
        b = best_of(lambda: call(nb), args.repeat)
        print(f"{name:<30}{a:>10.4f}{b:>10.4f}{a / b:>8.1f}x")


if __name__ == "__main__":
    main()
