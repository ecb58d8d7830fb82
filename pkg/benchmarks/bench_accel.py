"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_accel.py [--repeat 5]

Times the three hot kernels on desk-scale inputs. The numba column
excludes compilation (one warm-up call per kernel)."""

from __future__ import annotations

import argparse
import time

import numpy as np

from kolsim.accel import get_backend


def bench(fn, args, repeat):
    fn(*args)  # warm-up (JIT compile / cache load)
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def gmm_case(n=200_000, k=3):
    rng = np.random.default_rng(0)
    x = np.concatenate([
        rng.normal(420, 40, n // 2),
        rng.normal(800, 70, n // 4),
        rng.normal(1250, 60, n - n // 2 - n // 4),
    ])
    w = np.full(k, 1.0 / k)
    mu = np.quantile(x, (np.arange(k) + 0.5) / k)
    var = np.full(k, x.var())
    return (x, w, mu, var, 200, 1e-6, 1.0)


def cox_case(n=20_000, p=5):
    rng = np.random.default_rng(1)
    xs = rng.normal(size=(n, p))
    times = -np.log(rng.random(n)) / (0.1 * np.exp(xs[:, 0] * 0.5))
    events = (rng.random(n) > 0.2).astype(np.float64)
    order = np.argsort(-times, kind="stable")
    xs = np.ascontiguousarray(xs[order])
    events = events[order]
    t_s = times[order]
    starts = np.flatnonzero(np.r_[True, np.diff(t_s) != 0]).astype(np.int64)
    beta = rng.normal(0, 0.3, p)
    return (xs, events, starts, beta)


def ic_case(n=400, m=2000, runs=2000):
    rng = np.random.default_rng(2)
    edges = set()
    while len(edges) < m:
        u, v = rng.integers(n, size=2)
        if u != v:
            edges.add((int(u), int(v)))
    edges = sorted(edges)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for u, _ in edges:
        indptr[u + 1] += 1
    np.cumsum(indptr, out=indptr)
    indices = np.array([v for _, v in edges], dtype=np.int64)
    alive = (rng.random((runs, m)) < 0.1).astype(np.uint8)
    seeds = np.arange(5, dtype=np.int64)
    return (indptr, indices, alive, seeds)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    numba = get_backend("numba")
    numpy_ = get_backend("numpy")
    cases = [
        ("gmm_em (200k samples, K=3)", "gmm_em", gmm_case()),
        ("cox_ll_grad_hess (n=20k, p=5)", "cox_ll_grad_hess", cox_case()),
        ("ic_reach_mean (400 nodes, 2k edges, 2k worlds)", "ic_reach_mean", ic_case()),
    ]

    print(f"{'kernel':<48} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for label, name, case in cases:
        t_np = bench(getattr(numpy_, name), case, args.repeat)
        t_nb = bench(getattr(numba, name), case, args.repeat)
        print(f"{label:<48} {t_np*1e3:>8.1f}ms {t_nb*1e3:>8.1f}ms {t_np/t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
