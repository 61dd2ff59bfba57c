"""Numba vs pure-numpy timings for the hot kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is called once on both backends to compile / warm caches, then
timed over ``--repeat`` calls; the table reports the best per-call time.
"""

import argparse
import time

import numpy as np

from fairpc import _kernels_np as knp

try:
    from fairpc import _kernels_nb as knb
except ImportError:
    knb = None


def make_grams(k, n, m=50, seed=0):
    rng = np.random.default_rng(seed)
    G = np.empty((k, n, n))
    for i in range(k):
        A = rng.standard_normal((m, n))
        G[i] = A.T @ A
    s = np.array([np.linalg.eigvalsh(S)[-1] for S in G])
    return G, s


def best_time(fn, args, repeat):
    fn(*args)
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def cases():
    G3, s3 = make_grams(3, 10)
    G2, s2 = make_grams(2, 2)
    S = G3[0]
    x0 = np.ones(10)
    mu = np.array([0.2, 0.3, 0.5])
    v = np.linalg.eigh(S)[1][:, -1].copy()
    X = np.random.default_rng(1).standard_normal((100_000, 10))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return [
        ("top_eigpair 10x10", "top_eigpair", (S, 1e-8, True), 200),
        ("power_iteration 10x10", "power_iteration", (S, x0, 1e-12, 10000), 50),
        ("weighted_gram k=3 n=10", "weighted_gram", (G3, mu), 500),
        ("quad_forms k=3 n=10", "quad_forms", (G3, v), 500),
        ("frank_wolfe_loop 3x10, 2000 it", "frank_wolfe_loop", (G3, s3, 1e-8, 2000, 1e-8), 3),
        ("max_loss_batch 1e5 x 10", "max_loss_batch", (G3, s3, X), 3),
        ("grid_sweep_2d 1e6 steps", "grid_sweep_2d", (G2, s2, 1_000_000), 3),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=0,
                    help="override the per-kernel repeat count")
    args = ap.parse_args(argv)
    if knb is None:
        print("numba not importable; only the numpy backend can be timed")
    print(f"{'kernel':34s} {'numpy':>12s} {'numba':>12s} {'speedup':>8s}")
    for label, name, fargs, rep in cases():
        rep = args.repeat or rep
        t_np = best_time(getattr(knp, name), fargs, rep)
        if knb is None:
            print(f"{label:34s} {t_np * 1e6:10.1f}us")
            continue
        t_nb = best_time(getattr(knb, name), fargs, rep)
        print(f"{label:34s} {t_np * 1e6:10.1f}us {t_nb * 1e6:10.1f}us {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
