"""Compiled versus numpy backends for the two hot kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Each case reports the best
of several repeats and the maximum difference between the backends.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from complexflow import kernels


def _best(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_twisted(M: int, repeats: int):
    rng = np.random.default_rng(0)
    W1 = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    W2 = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    d = 8.0 / (M - 1)
    args = (W1, W2, d, d, 0.5, 1)
    out = {}
    res = {}
    for b in ("python", "cython"):
        res[b] = kernels.twisted_convolution(*args, backend=b)
        out[b] = _best(lambda: kernels.twisted_convolution(*args, backend=b), repeats)
    return out, float(np.abs(res["python"] - res["cython"]).max() / np.abs(res["python"]).max())


def bench_columns(N: int, K: int, repeats: int):
    rng = np.random.default_rng(1)
    x = np.linspace(-16, 16, N)
    q, p = rng.uniform(-8, 8, K), rng.uniform(-8, 8, K)
    args = (x, q, p, 1j, 0.75, 0.5)
    out = {}
    res = {}
    for b in ("python", "cython"):
        res[b] = kernels.coherent_columns(*args, backend=b)
        out[b] = _best(lambda: kernels.coherent_columns(*args, backend=b), repeats)
    return out, float(np.abs(res["python"] - res["cython"]).max())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args(argv)
    if kernels.BACKEND != "cython":
        print("compiled kernels are not built; nothing to compare")
        return 1
    if args.threads:
        kernels.set_num_threads(args.threads)
    print(f"{'kernel':<36}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    rows = [(f"twisted convolution M={M}", *bench_twisted(M, args.repeats)) for M in (33, 65, 129)]
    rows += [(f"coherent columns N={N} K={K}", *bench_columns(N, K, args.repeats)) for N, K in ((512, 4096), (512, 16384))]
    for name, t, diff in rows:
        print(f"{name:<36}{t['python']:>12.4f}{t['cython']:>12.4f}{t['python'] / t['cython']:>10.1f}{diff:>12.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
