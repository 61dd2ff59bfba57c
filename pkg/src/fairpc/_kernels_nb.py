"""Numba-compiled kernels. Same names and signatures as ``_kernels_np``.

Importing this module requires numba; compilation happens on first call and
is cached on disk.
"""

import numpy as np
from numba import njit

SIGN_TOL = 1e-12
PERTURB_REL = 1e-10

_jit = njit(cache=True, nogil=True)


@_jit
def fix_sign(v):
    for i in range(v.shape[0]):
        if abs(v[i]) > SIGN_TOL:
            if v[i] < 0.0:
                return -v
            return v
    return v


@_jit
def top_eigpair(S, degen_rel, perturb):
    n = S.shape[0]
    w, V = np.linalg.eigh(S)
    lam = w[n - 1]
    if lam <= 0.0:
        return 0.0, 0.0, np.full(n, 1.0 / np.sqrt(n)), True, False
    gap = lam - w[n - 2] if n > 1 else lam
    degenerate = gap < degen_rel * lam
    v = np.ascontiguousarray(V[:, n - 1])
    perturbed = False
    if degenerate and perturb:
        P = S.copy()
        P[0, 0] += PERTURB_REL * np.trace(S)
        w2, V2 = np.linalg.eigh(P)
        v = np.ascontiguousarray(V2[:, n - 1])
        perturbed = True
        degenerate = w2[n - 1] - w2[n - 2] < degen_rel * w2[n - 1]
    return lam, gap, fix_sign(v), degenerate, perturbed


@_jit
def power_iteration(S, x0, tol, max_iter):
    n = S.shape[0]
    x = x0 / np.sqrt(np.dot(x0, x0))
    best_res = np.inf
    best_x = x.copy()
    best_lam = 0.0
    y = np.empty(n)
    for it in range(1, max_iter + 1):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += S[i, j] * x[j]
            y[i] = acc
        lam = 0.0
        for i in range(n):
            lam += x[i] * y[i]
        res = 0.0
        ny = 0.0
        for i in range(n):
            r = y[i] - lam * x[i]
            res += r * r
            ny += y[i] * y[i]
        res = np.sqrt(res)
        ny = np.sqrt(ny)
        if res < best_res:
            best_res = res
            best_x = x.copy()
            best_lam = lam
        if res <= tol * max(1.0, abs(lam)):
            return lam, x, it, True, res
        if ny == 0.0:
            return 0.0, x, it, True, 0.0
        x = y / ny
    return best_lam, best_x, max_iter, False, best_res


@_jit
def weighted_gram(grams, mu):
    k, n, _ = grams.shape
    A = np.zeros((n, n))
    for i in range(k):
        if mu[i] != 0.0:
            A += mu[i] * grams[i]
    return A


@_jit
def quad_forms(grams, v):
    k, n, _ = grams.shape
    out = np.empty(k)
    for g in range(k):
        acc = 0.0
        for i in range(n):
            row = 0.0
            for j in range(n):
                row += grams[g, i, j] * v[j]
            acc += v[i] * row
        out[g] = acc
    return out


@_jit
def frank_wolfe_loop(grams, s, eps, max_iter, degen_rel):
    k = grams.shape[0]
    mu = np.zeros(k)
    mu[0] = 1.0
    lam, _, v, _, pert = top_eigpair(weighted_gram(grams, mu), degen_rel, True)
    n_perturbed = 1 if pert else 0
    best_v = v.copy()
    best_z = np.inf
    t = 0
    converged = False
    while t < max_iter:
        grad = s - quad_forms(grams, v)
        z = grad.max()
        if z < best_z:
            best_z = z
            best_v = v.copy()
        j = np.argmax(grad)
        gamma = 2.0 / (t + 2.0)
        new = (1.0 - gamma) * mu
        new[j] += gamma
        d = new - mu
        step = np.sqrt(np.dot(d, d))
        mu = new
        t += 1
        lam, _, v, _, pert = top_eigpair(weighted_gram(grams, mu), degen_rel, True)
        if pert:
            n_perturbed += 1
        if step < eps:
            converged = True
            break
    z = (s - quad_forms(grams, v)).max()
    if z < best_z:
        best_z = z
        best_v = v.copy()
    return mu, v, lam, t, converged, n_perturbed, best_v, best_z


@_jit
def max_loss_batch(grams, s, X):
    m, n = X.shape
    k = grams.shape[0]
    out = np.full(m, -np.inf)
    for g in range(k):
        Y = X @ np.ascontiguousarray(grams[g])
        for r in range(m):
            acc = 0.0
            for j in range(n):
                acc += Y[r, j] * X[r, j]
            h = s[g] - acc
            if h > out[r]:
                out[r] = h
    return out


@_jit
def grid_sweep_2d(grams, s, steps):
    k = grams.shape[0]
    best_val = np.inf
    best_idx = 0
    step = np.pi / steps
    for j in range(steps):
        t = j * step
        c = np.cos(t)
        sn = np.sin(t)
        worst = -np.inf
        for g in range(k):
            h = s[g] - (grams[g, 0, 0] * c * c + 2.0 * grams[g, 0, 1] * c * sn
                        + grams[g, 1, 1] * sn * sn)
            if h > worst:
                worst = h
        if worst < best_val:
            best_val = worst
            best_idx = j
    return best_idx, best_val
