"""Greedy fair orthonormal basis: solve, deflate, repeat.

Each component is a rank-1 fair solution on the Grams deflated by all
previous components, so the rank-``r`` basis is always the first ``r``
components of any longer basis (the containment property), and the
cumulative loss is the sum of the per-iteration rank-1 losses.
"""

import numpy as np

from .core import FairBasis, FairComponentResult, Solver, deflate
from .errors import InputError
from .solvers import DEFAULT_CONFIG, dual_objective, primal_value, solve_fair_pc

# a group counts as exhausted once its residual trace drops below this
# fraction of its starting trace
EXHAUSTED_REL = 1e-12


def _project_out(v, comps):
    for c in comps:
        v = v - (c @ v) * c
    return v


def _complement_vector(comps, n):
    """Deterministic unit vector orthogonal to ``comps``."""
    E = np.eye(n)
    cand = [_project_out(E[j], comps) for j in range(n)]
    j = int(np.argmax([np.linalg.norm(c) for c in cand]))
    v = _project_out(cand[j], comps)
    return v / np.linalg.norm(v)


def _reorthogonalize(v, comps):
    if not comps:
        return v
    w = _project_out(v, comps)
    norm = np.linalg.norm(w)
    if norm < 1e-8:
        return _complement_vector(comps, v.shape[0])
    return w / norm


def _rebind(res, gram_set, v):
    _, h = primal_value(gram_set, v)
    return FairComponentResult(v=v, mu=res.mu, dual_value=res.dual_value, h=h,
                               solver=res.solver, iterations=res.iterations,
                               converged=res.converged, notes=res.notes)


def _completion(gram_set, comps):
    v = _complement_vector(comps, gram_set.n)
    mu = np.full(gram_set.k, 1.0 / gram_set.k)
    g, _, _ = dual_objective(gram_set, mu)
    _, h = primal_value(gram_set, v)
    return FairComponentResult(v=v, mu=mu, dual_value=g, h=h,
                               solver=Solver.COMPLETION, iterations=0)


def fit(gram_set, d, config=DEFAULT_CONFIG, complete=False, on_iteration=None):
    """Fair orthonormal basis of rank ``d``.

    If every group's residual vanishes before ``d`` components exist, the
    basis built so far is returned with ``rank_deficient=True``; with
    ``complete=True`` it is instead padded with a deterministic orthonormal
    complement (solver tag ``Completion``). ``on_iteration(r, result)`` is
    called after each component is fixed.
    """
    n = gram_set.n
    if not 1 <= d <= n:
        raise InputError(f"rank {d} must lie in [1, {n}] (feature count {n})")
    floor = EXHAUSTED_REL * np.maximum(gram_set.traces, 1.0)
    comps, results = [], []
    current = gram_set
    deficient = False
    for _ in range(d):
        if np.all(current.traces <= floor):
            deficient = True
            if not complete:
                break
            res = _completion(current, comps)
        else:
            res = solve_fair_pc(current, config)
            v = _reorthogonalize(res.v, comps)
            if v is not res.v:
                res = _rebind(res, current, v)
        comps.append(res.v)
        results.append(res)
        if on_iteration is not None:
            on_iteration(len(results), res)
        current = deflate(current, res.v, method=config.eig_method)
    C = np.array(comps).reshape(len(comps), n)
    return FairBasis(C, results, rank_deficient=deficient)


def truncate(basis, r):
    """First ``r`` components with their diagnostics."""
    if not 1 <= r <= basis.d:
        raise InputError(f"rank {r} must lie in [1, {basis.d}]")
    head = basis.per_iteration[:r]
    deficient = any(res.solver == Solver.COMPLETION for res in head)
    return FairBasis(basis.components[:r], head, rank_deficient=deficient)


def deflation_sequence(gram_set, components, method="dense"):
    """The Gram sets seen before each component: ``[G_0, G_1, ..., G_{d-1}]``."""
    seq = [gram_set]
    for v in components[:-1]:
        seq.append(deflate(seq[-1], v, method=method))
    return seq
