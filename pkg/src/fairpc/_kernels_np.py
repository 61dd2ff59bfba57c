"""Pure-numpy kernels. Same names and signatures as ``_kernels_nb``."""

import numpy as np

SIGN_TOL = 1e-12
PERTURB_REL = 1e-10
_CHUNK = 1 << 16


def fix_sign(v):
    # first coordinate above SIGN_TOL in magnitude is made positive
    idx = np.flatnonzero(np.abs(v) > SIGN_TOL)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def top_eigpair(S, degen_rel, perturb):
    """Leading eigenpair of a symmetric PSD matrix via LAPACK.

    Returns ``(value, gap, vector, degenerate, perturbed)``. ``gap`` is the
    distance to the second eigenvalue of the unperturbed matrix. When the
    top eigenvalue is degenerate and ``perturb`` is set, the vector comes
    from ``S`` with ``1e-10 * trace(S)`` added to its first diagonal entry;
    the value is always that of the unperturbed matrix.
    """
    n = S.shape[0]
    w, V = np.linalg.eigh(S)
    lam = w[n - 1]
    if lam <= 0.0:
        return 0.0, 0.0, np.full(n, 1.0 / np.sqrt(n)), True, False
    gap = lam - w[n - 2] if n > 1 else lam
    degenerate = bool(gap < degen_rel * lam)
    v = V[:, n - 1].copy()
    perturbed = False
    if degenerate and perturb:
        P = S.copy()
        P[0, 0] += PERTURB_REL * np.trace(S)
        w2, V2 = np.linalg.eigh(P)
        v = V2[:, n - 1].copy()
        perturbed = True
        degenerate = bool(w2[n - 1] - w2[n - 2] < degen_rel * w2[n - 1])
    return float(lam), float(gap), fix_sign(v), degenerate, perturbed


def power_iteration(S, x0, tol, max_iter):
    """Plain power iteration with Rayleigh-quotient estimates.

    Stops once ``||S x - rq x|| <= tol * max(1, rq)``. Returns
    ``(value, vector, iterations, converged, residual)``; on failure the
    best iterate (smallest residual) is returned with ``converged=False``.
    """
    x = x0 / np.linalg.norm(x0)
    best_res = np.inf
    best_x = x
    best_lam = 0.0
    for it in range(1, max_iter + 1):
        y = S @ x
        lam = x @ y
        res = np.linalg.norm(y - lam * x)
        if res < best_res:
            best_res, best_x, best_lam = res, x, lam
        if res <= tol * max(1.0, abs(lam)):
            return lam, x, it, True, res
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, x, it, True, 0.0
        x = y / ny
    return best_lam, best_x, max_iter, False, best_res


def weighted_gram(grams, mu):
    A = np.zeros(grams.shape[1:])
    for i in range(grams.shape[0]):
        if mu[i] != 0.0:
            A += mu[i] * grams[i]
    return A


def quad_forms(grams, v):
    return np.array([v @ (G @ v) for G in grams])


def frank_wolfe_loop(grams, s, eps, max_iter, degen_rel):
    """Frank-Wolfe ascent on the dual over the probability simplex.

    Returns ``(mu, v, lam, iterations, converged, n_perturbed, best_v,
    best_z)``. ``v`` and ``lam`` belong to the final ``mu``; ``best_v`` is
    the iterate eigenvector with the smallest primal value ``best_z``. The
    dual gradient at ``mu`` is the loss vector at ``v(mu)``, so tracking it
    costs nothing.
    """
    k = grams.shape[0]
    mu = np.zeros(k)
    mu[0] = 1.0
    lam, _, v, _, pert = top_eigpair(weighted_gram(grams, mu), degen_rel, True)
    n_perturbed = int(pert)
    best_v = v
    best_z = np.inf
    t = 0
    converged = False
    while t < max_iter:
        grad = s - quad_forms(grams, v)
        z = grad.max()
        if z < best_z:
            best_z, best_v = z, v
        j = int(np.argmax(grad))
        gamma = 2.0 / (t + 2.0)
        new = (1.0 - gamma) * mu
        new[j] += gamma
        step = np.linalg.norm(new - mu)
        mu = new
        t += 1
        lam, _, v, _, pert = top_eigpair(weighted_gram(grams, mu), degen_rel, True)
        n_perturbed += int(pert)
        if step < eps:
            converged = True
            break
    z = (s - quad_forms(grams, v)).max()
    if z < best_z:
        best_z, best_v = z, v
    return mu, v, lam, t, converged, n_perturbed, best_v, best_z


def max_loss_batch(grams, s, X):
    """max_i (s_i - x^T G_i x) for every row x of ``X``."""
    out = np.full(X.shape[0], -np.inf)
    for i in range(grams.shape[0]):
        np.maximum(out, s[i] - np.einsum("mj,mj->m", X @ grams[i], X), out=out)
    return out


def grid_sweep_2d(grams, s, steps):
    """Minimise max_i h_i over v = (cos t, sin t), t = j*pi/steps.

    Returns ``(index, value)`` of the first minimiser.
    """
    a = grams[:, 0, 0][:, None]
    b = grams[:, 0, 1][:, None]
    d = grams[:, 1, 1][:, None]
    s = s[:, None]
    best_val = np.inf
    best_idx = 0
    for start in range(0, steps, _CHUNK):
        j = np.arange(start, min(start + _CHUNK, steps))
        t = j * (np.pi / steps)
        c = np.cos(t)
        sn = np.sin(t)
        h = s - (a * c * c + 2.0 * b * c * sn + d * sn * sn)
        m = h.max(axis=0)
        i = int(np.argmin(m))
        if m[i] < best_val:
            best_val = float(m[i])
            best_idx = int(j[i])
    return best_idx, best_val
