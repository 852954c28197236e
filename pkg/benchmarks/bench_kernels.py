"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 7]

Prints the median wall time of each kernel on each backend and the speedup.
"""
import argparse
import statistics
import time

import numpy as np

from orliczsketch import _backend
from orliczsketch.orlicz import make_orlicz


def _median_time(fn, repeat):
    fn()
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def cases(rng):
    n, d, t = 200_000, 10, 250
    bucket = rng.integers(0, t, n).astype(np.int64)
    weight = rng.standard_normal(n)
    A = rng.standard_normal((n, d))
    rows = np.repeat(np.arange(n, dtype=np.int64), 2)
    cols = rng.integers(0, d, 2 * n).astype(np.int64)
    vals = rng.standard_normal(2 * n)
    x = rng.standard_cauchy(100_000)
    huber = make_orlicz("huber", 0.75).kernel_args
    l15 = make_orlicz("l15", 0.25).kernel_args
    return {
        "countsketch_dense 200000x10": lambda k: k.countsketch_dense(A, bucket, weight, t),
        "countsketch_coo nnz=400000": lambda k: k.countsketch_coo(rows, cols, vals, bucket,
                                                                  weight, t, d),
        "orlicz_norm huber n=100000": lambda k: k.orlicz_norm(x, *huber),
        "orlicz_norm l15 n=100000": lambda k: k.orlicz_norm(x, *l15),
        "orlicz_norm_grad huber n=100000": lambda k: k.orlicz_norm_grad(x, *huber),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)
    py = _backend.load("python")
    try:
        cy = _backend.load("cython")
    except ImportError:
        cy = None
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':34s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(np.random.default_rng(0)).items():
        tp = _median_time(lambda: fn(py), args.repeat)
        if cy is None:
            print(f"{name:34s} {tp * 1e3:10.2f}")
            continue
        tc = _median_time(lambda: fn(cy), args.repeat)
        print(f"{name:34s} {tp * 1e3:10.2f} {tc * 1e3:10.2f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
