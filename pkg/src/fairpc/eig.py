"""Deterministic eigensolvers for symmetric positive semidefinite matrices.

Two methods are available everywhere:

``"dense"``
    LAPACK ``syevd`` through numpy (or numba). Exact to working precision and
    indifferent to eigenvalue gaps. This is the default.
``"power"``
    Power iteration from the normalised all-ones vector. Cheap per step but
    its iteration count grows like ``1 / relative_gap``; it raises
    :class:`EigenConvergenceError` when it cannot reach ``tol``.

Sign convention for returned vectors: the first coordinate larger than
``1e-12`` in magnitude is positive.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EigenConvergenceError, InputError

SYMMETRY_TOL = 1e-9
DEGENERACY_REL = 1e-8
PERTURB_REL = 1e-10
METHODS = ("dense", "power")


@dataclass(frozen=True)
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int
    degenerate: bool
    perturbed: bool = False


def as_symmetric(S, tol=SYMMETRY_TOL):
    """Validate a square symmetric matrix, returning a contiguous float copy."""
    S = np.ascontiguousarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InputError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(S).max()))
    if float(np.abs(S - S.T).max()) > tol * scale:
        raise InputError("matrix is not symmetric")
    return S


def _start_vectors(n):
    yield np.ones(n)
    if n >= 2:
        e = np.zeros(n)
        e[:2] = 1.0
        yield e
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        yield e


def _power(S, tol, max_iter):
    total = 0
    res = None
    floor = float(np.diag(S).max()) - 1e-9 * max(1.0, float(np.abs(S).max()))
    for x0 in _start_vectors(S.shape[0]):
        lam, x, it, ok, resid = kernels.power_iteration(S, x0, tol, max_iter)
        total += it
        if not ok:
            raise EigenConvergenceError(
                f"power iteration did not converge in {max_iter} iterations "
                f"(residual {resid:.3e})", float(lam), kernels.fix_sign(x), float(resid), total)
        res = (float(lam), x)
        # lambda_max of a PSD matrix is at least its largest diagonal entry;
        # converging below that means the start vector missed the top
        # eigenspace (typically it sat in the null space), so try the next one
        if lam >= floor:
            break
    return res[0], res[1], total


def _power_second(S, lam, v, tol, max_iter):
    if S.shape[0] == 1:
        return -np.inf
    D = S - lam * np.outer(v, v)
    D = 0.5 * (D + D.T)
    x0 = np.ones(S.shape[0]) - v * v.sum()
    if not np.any(np.abs(x0) > 1e-12):
        x0 = np.eye(S.shape[0])[int(np.argmin(np.abs(v)))]
    lam2, *_ = kernels.power_iteration(D, x0, tol, max_iter)
    return float(lam2)


def leading_eigenpair(S, tol=1e-12, max_iter=10000, method="dense", perturb=False):
    """Largest eigenvalue and unit eigenvector of a symmetric PSD matrix.

    ``degenerate`` is set when the top two eigenvalues are within
    ``1e-8 * value`` of each other (always for the zero matrix, whose vector
    is the normalised all-ones start vector). With ``perturb=True`` a
    degenerate matrix is re-solved once with ``1e-10 * trace(S)`` added to
    its first diagonal entry; the reported value stays that of ``S``.
    """
    S = as_symmetric(S)
    if method == "dense":
        lam, _, v, degenerate, perturbed = kernels.top_eigpair(S, DEGENERACY_REL, perturb)
        return EigenResult(float(lam), np.asarray(v), 1, bool(degenerate), bool(perturbed))
    if method != "power":
        raise InputError(f"unknown eigen method {method!r}; expected one of {METHODS}")

    lam, v, iters = _power(S, tol, max_iter)
    n = S.shape[0]
    if lam <= 0.0:
        return EigenResult(0.0, np.full(n, 1.0 / np.sqrt(n)), iters, True)
    lam2 = _power_second(S, lam, v, tol, max_iter)
    degenerate = lam - lam2 < DEGENERACY_REL * lam
    perturbed = False
    if degenerate and perturb:
        P = S.copy()
        P[0, 0] += PERTURB_REL * np.trace(S)
        _, v, more = _power(P, tol, max_iter)
        iters += more
        perturbed = True
    return EigenResult(lam, np.asarray(kernels.fix_sign(v)), iters, bool(degenerate), perturbed)


def _clamp(values):
    # PSD input: anything below zero is rounding noise
    return np.maximum(values, 0.0)


def top_k_eigenvalues(S, k, method="dense", tol=1e-12, max_iter=10000):
    """The ``k`` largest eigenvalues, nonincreasing, clamped at zero."""
    S = as_symmetric(S)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k must lie in [1, {n}], got {k}")
    if method == "dense":
        w = np.linalg.eigvalsh(S)[::-1][:k]
        return _clamp(w)
    if method != "power":
        raise InputError(f"unknown eigen method {method!r}; expected one of {METHODS}")
    # Hotelling deflation
    out = np.empty(k)
    D = S.copy()
    for j in range(k):
        r = leading_eigenpair(D, tol, max_iter, method="power")
        out[j] = r.value
        D = D - r.value * np.outer(r.vector, r.vector)
        D = 0.5 * (D + D.T)
    return _clamp(np.sort(out)[::-1])


def eigh_descending(S):
    """Full eigendecomposition, eigenvalues descending, sign-normalised columns."""
    S = as_symmetric(S)
    w, V = np.linalg.eigh(S)
    w = w[::-1]
    V = V[:, ::-1]
    for j in range(V.shape[1]):
        V[:, j] = kernels.fix_sign(np.ascontiguousarray(V[:, j]))
    return w, V
