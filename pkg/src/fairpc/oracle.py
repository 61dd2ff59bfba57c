"""Brute-force reference solvers for the rank-1 problem.

They share no code with the dual solvers beyond the loss evaluation, so
they can be used to pin expected values and to sandwich solver output.
"""

import numpy as np

from . import kernels
from .errors import InputError

GRID_MIN_STEPS = 1000
RANDOM_MIN_SAMPLES = 10_000
_CHUNK = 1 << 15


def _max_loss(gram_set, v):
    return float((gram_set.top_eigenvalues - kernels.quad_forms(gram_set.grams, v)).max())


def grid_oracle_2d(gram_set, steps=1_000_000):
    """Sweep ``v = (cos t, sin t)`` for ``t = j pi / steps``, ``j < steps``.

    Returns ``(z, v)`` for the first grid minimiser of ``max_i h_i``.
    """
    if gram_set.n != 2:
        raise InputError(f"grid oracle needs n = 2, got n = {gram_set.n}")
    steps = int(steps)
    if steps < GRID_MIN_STEPS:
        raise InputError(f"steps must be at least {GRID_MIN_STEPS}, got {steps}")
    j, z = kernels.grid_sweep_2d(np.ascontiguousarray(gram_set.grams),
                                 np.ascontiguousarray(gram_set.top_eigenvalues), steps)
    t = j * (np.pi / steps)
    return float(z), np.array([np.cos(t), np.sin(t)])


def _tangent(v, d):
    d = d - (v @ d) * v
    norm = np.linalg.norm(d)
    return d / norm if norm > 0 else d


def _refine(gram_set, v, z, iters, fd_step=1e-7):
    """Step-halving descent on ``max_i h_i`` over the sphere.

    Each round tries the negative finite-difference gradient, then the
    projected coordinate directions; if nothing improves, the step halves.
    """
    n = v.shape[0]
    alpha = 0.1
    eye = np.eye(n)
    for _ in range(iters):
        if alpha < 1e-15:
            break
        grad = np.empty(n)
        for j in range(n):
            e = eye[j] * fd_step
            grad[j] = (_max_loss(gram_set, _unit(v + e)) - _max_loss(gram_set, _unit(v - e))) / (2 * fd_step)
        dirs = [-_tangent(v, grad)]
        for j in range(n):
            t = _tangent(v, eye[j])
            dirs.extend((t, -t))
        moved = False
        for d in dirs:
            if not np.any(d):
                continue
            cand = _unit(v + alpha * d)
            zc = _max_loss(gram_set, cand)
            if zc < z:
                v, z, moved = cand, zc, True
                break
        if not moved:
            alpha *= 0.5
    return z, v


def _unit(x):
    return x / np.linalg.norm(x)


def random_oracle(gram_set, samples=100_000, refine_iters=200, seed=0):
    """Best of ``samples`` random unit vectors, then local refinement.

    Vectors are normalised standard normals from a Philox generator drawn in
    fixed-size chunks, so the first ``m`` samples do not depend on
    ``samples`` and the result is an upper bound on the optimum that can
    only decrease as ``samples`` grows. Returns ``(z, v)``.
    """
    n = gram_set.n
    if n < 2:
        raise InputError(f"random oracle needs n >= 2, got n = {n}")
    samples = int(samples)
    if samples < RANDOM_MIN_SAMPLES:
        raise InputError(f"samples must be at least {RANDOM_MIN_SAMPLES}, got {samples}")
    rng = np.random.Generator(np.random.Philox(seed))
    grams = np.ascontiguousarray(gram_set.grams)
    s = np.ascontiguousarray(gram_set.top_eigenvalues)
    best_z, best_v = np.inf, None
    for start in range(0, samples, _CHUNK):
        X = rng.standard_normal((min(_CHUNK, samples - start), n))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        vals = kernels.max_loss_batch(grams, s, X)
        i = int(np.argmin(vals))
        if vals[i] < best_z:
            best_z, best_v = float(vals[i]), X[i].copy()
    z, v = _refine(gram_set, best_v, best_z, int(refine_iters))
    return float(z), kernels.fix_sign(v)
