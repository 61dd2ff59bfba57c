"""Rank-1 fair principal component solvers.

The primal problem is ``min_v max_i h_i(v)`` over unit vectors, with
``h_i(v) = s_i - v^T S_i v`` and ``s_i`` the top eigenvalue of ``S_i``. Its
Lagrange dual over the probability simplex is

    g(mu) = mu . s - lambda_max(sum_i mu_i S_i),

a concave function whose gradient is ``h`` evaluated at the leading
eigenvector of ``sum_i mu_i S_i``. For two groups the dual is solved by
finding the root of its one-dimensional derivative; for more groups by
Frank-Wolfe with the classic ``2 / (t + 2)`` step.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import eig, kernels
from .core import DualWeights, FairComponentResult, Solver, require_unit
from .errors import InputError, SolverError

AUTO, BRENT, FRANK_WOLFE = "auto", "brent", "frank-wolfe"
SOLVER_CHOICES = (AUTO, BRENT, FRANK_WOLFE)


@dataclass(frozen=True)
class SolverConfig:
    epsilon_fw: float = 1e-8
    max_iter_fw: int = 10000
    brent_tol: float = 1e-12
    eig_tol: float = 1e-12
    solver_choice: str = AUTO
    eig_method: str = "dense"
    # refine the Frank-Wolfe primal vector; False returns v(mu_final) as is
    polish_primal: bool = True

    def __post_init__(self):
        for name in ("epsilon_fw", "brent_tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if self.max_iter_fw < 1:
            raise InputError("max_iter_fw must be at least 1")
        if self.solver_choice not in SOLVER_CHOICES:
            raise InputError(f"solver_choice must be one of {SOLVER_CHOICES}")
        if self.eig_method not in eig.METHODS:
            raise InputError(f"eig_method must be one of {eig.METHODS}")


DEFAULT_CONFIG = SolverConfig()


def _eig(S, config, perturb=True):
    return eig.leading_eigenpair(S, tol=config.eig_tol, method=config.eig_method,
                                 perturb=perturb)


def _notes(r):
    return ("perturbed",) if r.perturbed else ()


def primal_value(gram_set, v):
    """Return ``(z, h)`` with ``h_i = s_i - v^T S_i v`` and ``z = max h``."""
    v = require_unit(v, gram_set.n)
    h = gram_set.top_eigenvalues - kernels.quad_forms(gram_set.grams, v)
    return float(h.max()), h


def dual_objective(gram_set, mu, config=DEFAULT_CONFIG):
    """Return ``(g, v_mu, lambda_mu)`` at a simplex point ``mu``."""
    mu = mu if isinstance(mu, DualWeights) else DualWeights(mu)
    if len(mu) != gram_set.k:
        raise InputError(f"expected {gram_set.k} dual weights, got {len(mu)}")
    r = _eig(kernels.weighted_gram(gram_set.grams, mu.mu), config)
    g = float(mu.mu @ gram_set.top_eigenvalues) - r.value
    return g, r.vector, r.value


def dual_gradient(gram_set, v_mu):
    """Gradient of the dual at the ``mu`` whose leading eigenvector is ``v_mu``."""
    v_mu = require_unit(v_mu, gram_set.n)
    return gram_set.top_eigenvalues - kernels.quad_forms(gram_set.grams, v_mu)


def _result(gram_set, v, mu, g, solver, iterations, converged=True, notes=()):
    _, h = primal_value(gram_set, v)
    return FairComponentResult(v=v, mu=DualWeights(mu), dual_value=g, h=h, solver=solver,
                               iterations=int(iterations), converged=bool(converged),
                               notes=tuple(notes))


def polish_primal(gram_set, v0, max_iter=100):
    """Local minimax refinement of ``max_i h_i`` on the unit sphere.

    Solves ``min z  s.t.  h_i(v) <= z, |v| = 1`` with SLSQP started at
    ``v0``. Returns ``(v, improved)``; ``v0`` comes back unchanged unless
    the refined point has a strictly smaller primal value.
    """
    G = gram_set.grams
    s = gram_set.top_eigenvalues
    n = gram_set.n
    z0, _ = primal_value(gram_set, v0)

    def ineq(x):
        v = x[:n]
        return x[n] - s + np.einsum("i,kij,j->k", v, G, v)

    def ineq_jac(x):
        J = np.empty((G.shape[0], n + 1))
        J[:, :n] = 2.0 * (G @ x[:n])
        J[:, n] = 1.0
        return J

    cons = (
        {"type": "ineq", "fun": ineq, "jac": ineq_jac},
        {"type": "eq", "fun": lambda x: np.array([x[:n] @ x[:n] - 1.0]),
         "jac": lambda x: np.append(2.0 * x[:n], 0.0)[None, :]},
    )
    grad = np.zeros(n + 1)
    grad[n] = 1.0
    res = optimize.minimize(lambda x: x[n], np.append(v0, z0), jac=lambda x: grad,
                            method="SLSQP", constraints=cons,
                            options={"maxiter": max_iter, "ftol": 1e-13 * max(1.0, abs(z0))})
    v = res.x[:n]
    norm = np.linalg.norm(v)
    if not np.all(np.isfinite(v)) or norm == 0.0:
        return v0, False
    v = kernels.fix_sign(v / norm)
    z, _ = primal_value(gram_set, v)
    if z < z0:
        return v, True
    return v0, False


CLUSTER_REL = 1e-2
CLUSTER_MAX = 8


def _cluster_starts(gram_set, mu):
    """Unit vectors spanning the near-top eigenspace of ``A(mu)``.

    When the leading eigenvalue of ``A(mu*)`` is (nearly) repeated, the
    primal optimum is a combination of the clustered eigenvectors rather
    than any single one. Returns the clustered eigenvectors and their
    normalised sum.
    """
    w, V = eig.eigh_descending(kernels.weighted_gram(gram_set.grams, mu))
    top = max(float(w[0]), np.finfo(float).tiny)
    p = min(int(np.count_nonzero(w >= w[0] - CLUSTER_REL * top)), CLUSTER_MAX)
    if p < 2:
        return []
    U = V[:, :p]
    mean = U.sum(axis=1)
    return [np.ascontiguousarray(U[:, j]) for j in range(p)] + [mean / np.linalg.norm(mean)]


def _finish_fw(gram_set, mu, v, g, t, converged, notes, best_v, config):
    if config.polish_primal:
        starts = [v, best_v] + _cluster_starts(gram_set, mu)
        z0, _ = primal_value(gram_set, v)
        best = (z0, v)
        for i, x in enumerate(starts):
            if any(np.array_equal(x, y) for y in starts[:i]):
                continue
            cand, _ = polish_primal(gram_set, x)
            zc, _ = primal_value(gram_set, cand)
            if zc < best[0]:
                best = (zc, cand)
        if best[1] is not v:
            v = best[1]
            notes += ("polished",)
    return _result(gram_set, v, mu, g, Solver.FRANK_WOLFE, t, converged, notes)


def frank_wolfe(gram_set, config=DEFAULT_CONFIG):
    """Frank-Wolfe on the dual, started at the first simplex vertex.

    Stops when the dual iterate moves by less than ``epsilon_fw`` or after
    ``max_iter_fw`` steps; the latter is reported via ``converged=False``.
    The dual side (``mu`` and ``g``) is the plain iteration. Unless
    ``polish_primal`` is off, the returned vector is the best of
    :func:`polish_primal` runs started from the final eigenvector, the best
    iterate and the near-top eigenspace of the final ``A(mu)``.
    """
    if config.eig_method != "dense":
        return frank_wolfe_reference(gram_set, config)
    s = np.ascontiguousarray(gram_set.top_eigenvalues)
    mu, v, lam, t, converged, n_pert, best_v, _ = kernels.frank_wolfe_loop(
        np.ascontiguousarray(gram_set.grams), s, config.epsilon_fw, config.max_iter_fw,
        eig.DEGENERACY_REL)
    mu = np.asarray(mu)
    g = float(mu @ s) - float(lam)
    notes = (f"perturbed:{n_pert}",) if n_pert else ()
    return _finish_fw(gram_set, mu, np.asarray(v), g, t, converged, notes,
                      np.asarray(best_v), config)


def frank_wolfe_reference(gram_set, config=DEFAULT_CONFIG):
    """The same iteration written against the public dual operations.

    Used for the power-iteration eigen method and as an independent check on
    the compiled loop.
    """
    k = gram_set.k
    mu = np.zeros(k)
    mu[0] = 1.0
    g, v, _ = dual_objective(gram_set, DualWeights(mu), config)
    best_v, best_z = v, np.inf
    t = 0
    converged = False
    while t < config.max_iter_fw:
        grad = dual_gradient(gram_set, v)
        if grad.max() < best_z:
            best_v, best_z = v, float(grad.max())
        j = int(np.argmax(grad))  # lowest index on ties
        gamma = 2.0 / (t + 2.0)
        new = (1.0 - gamma) * mu
        new[j] += gamma
        step = float(np.linalg.norm(new - mu))
        mu = new
        t += 1
        g, v, _ = dual_objective(gram_set, DualWeights(mu), config)
        if step < config.epsilon_fw:
            converged = True
            break
    return _finish_fw(gram_set, mu, v, g, t, converged, (), best_v, config)


def _require_two(gram_set):
    if gram_set.k != 2:
        raise InputError(f"the two-group solver needs exactly 2 groups, got {gram_set.k}")


def _q_eval(gram_set, mu, config):
    S1, S2 = gram_set.grams
    s1, s2 = gram_set.top_eigenvalues
    r = _eig(mu * S1 + (1.0 - mu) * S2, config)
    v = r.vector
    q = float(s1 - s2 - v @ (S1 - S2) @ v)
    return q, v, r


def q_function(gram_set, mu_scalar, config=DEFAULT_CONFIG):
    """Dual derivative along the two-group simplex, ``(q, v)``.

    ``q(mu) = s1 - s2 - v^T (S1 - S2) v`` with ``v`` the leading eigenvector
    of ``mu S1 + (1 - mu) S2``; equivalently ``h_1(v) - h_2(v)``.
    """
    _require_two(gram_set)
    if not 0.0 <= mu_scalar <= 1.0:
        raise InputError(f"mu must lie in [0, 1], got {mu_scalar!r}")
    q, v, _ = _q_eval(gram_set, float(mu_scalar), config)
    return q, v


def _equalize_in_eigenspace(gram_set, mu):
    """Equal-loss vector inside the top-2 eigenspace of C(mu).

    At a degenerate crossing q jumps across zero, so no eigenvector
    equalises the losses; a rotation inside the eigenspace does.
    """
    S1, S2 = gram_set.grams
    s1, s2 = gram_set.top_eigenvalues
    _, V = eig.eigh_descending(mu * S1 + (1.0 - mu) * S2)
    u1, u2 = V[:, 0], V[:, 1]
    D = S1 - S2

    def f(phi):
        v = np.cos(phi) * u1 + np.sin(phi) * u2
        return float(s1 - s2 - v @ D @ v)

    grid = np.linspace(0.0, np.pi, 65)
    vals = np.array([f(p) for p in grid])
    idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)
    if idx.size:
        a, b = grid[idx[0]], grid[idx[0] + 1]
        phi = a if vals[idx[0]] == 0 else optimize.brentq(f, a, b, xtol=1e-14)
    else:
        phi = grid[int(np.argmin(np.abs(vals)))]
    v = np.cos(phi) * u1 + np.sin(phi) * u2
    return kernels.fix_sign(v / np.linalg.norm(v))


def brent_two_group(gram_set, config=DEFAULT_CONFIG):
    """Optimal two-group solution from the root of ``q`` on ``[0, 1]``."""
    _require_two(gram_set)
    s1, s2 = (float(x) for x in gram_set.top_eigenvalues)
    q0, v0, r0 = _q_eval(gram_set, 0.0, config)
    q1, v1, r1 = _q_eval(gram_set, 1.0, config)
    edge_tol = 1e-9 * max(1.0, s1 + s2)

    if abs(q0) <= edge_tol:
        return _result(gram_set, v0, [0.0, 1.0], s2 - r0.value, Solver.BRENT, 2,
                       notes=("boundary:mu=0",) + _notes(r0))
    if abs(q1) <= edge_tol:
        return _result(gram_set, v1, [1.0, 0.0], s1 - r1.value, Solver.BRENT, 2,
                       notes=("boundary:mu=1",) + _notes(r1))
    if np.sign(q0) == np.sign(q1):
        # q(0) = h_1(v_2) >= 0 >= -h_2(v_1) = q(1) in exact arithmetic
        z0, _ = primal_value(gram_set, v0)
        z1, _ = primal_value(gram_set, v1)
        if z0 <= z1:
            return _result(gram_set, v0, [0.0, 1.0], s2 - r0.value, Solver.BRENT, 2,
                           notes=("anomaly:same-sign",))
        return _result(gram_set, v1, [1.0, 0.0], s1 - r1.value, Solver.BRENT, 2,
                       notes=("anomaly:same-sign",))

    mu, info = optimize.brentq(lambda m: _q_eval(gram_set, m, config)[0], 0.0, 1.0,
                               xtol=config.brent_tol, maxiter=500, full_output=True,
                               disp=False)
    if not info.converged:
        raise SolverError(f"Brent's method failed: {info.flag}")
    q, v, r = _q_eval(gram_set, mu, config)
    notes = _notes(r)
    cert = 1e-8 * max(1.0, abs(s1 - s2) + s1 + s2)
    if abs(q) > cert:
        v = _equalize_in_eigenspace(gram_set, mu)
        notes += ("eigenspace-rotation",)
    g = mu * s1 + (1.0 - mu) * s2 - r.value
    return _result(gram_set, v, [mu, 1.0 - mu], g, Solver.BRENT, info.iterations + 3,
                   notes=notes)


def single_group(gram_set, config=DEFAULT_CONFIG):
    r = _eig(gram_set.grams[0], config)
    g = float(gram_set.top_eigenvalues[0]) - r.value
    return _result(gram_set, r.vector, [1.0], g, Solver.SINGLE_GROUP, r.iterations,
                   notes=_notes(r))


def solve_fair_pc(gram_set, config=DEFAULT_CONFIG):
    """One fair component: single group, Brent for two groups, else Frank-Wolfe."""
    choice = config.solver_choice
    if choice == BRENT:
        return brent_two_group(gram_set, config)
    if choice == FRANK_WOLFE:
        return frank_wolfe(gram_set, config)
    if gram_set.k == 1:
        return single_group(gram_set, config)
    if gram_set.k == 2:
        return brent_two_group(gram_set, config)
    return frank_wolfe(gram_set, config)
