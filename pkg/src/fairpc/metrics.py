"""Per-group losses of a basis, rank by rank.

Three losses are tracked for every group ``i`` and rank ``r``:

* marginal: ``sum_{j<=r} lambda_j(S_i) - sum_{j<=r} v_j^T S_i v_j``, the energy
  lost relative to the group's own best rank-``r`` subspace;
* incremental: the sum of the rank-1 losses ``h_i`` seen while the basis was
  built greedily on deflated Grams;
* reconstruction: ``tr(S_i) - sum_{j<=r} v_j^T S_i v_j``, i.e. the squared
  Frobenius residual ``||A_i - A_i V V^T||^2``.
"""

from dataclasses import dataclass

import numpy as np

from . import eig, kernels
from .core import ORTHONORMAL_TOL, build_gram_set, deflate
from .errors import InputError
from .orthonormalization import fit
from .solvers import DEFAULT_CONFIG

FAIR, STANDARD = "FairPCs", "StandardPCA"
DEGENERACY_REL = 1e-8


def _orthonormal_columns(V, n):
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if V.ndim != 2 or V.shape[0] != n:
        raise InputError(f"expected an n x r basis with n = {n}, got shape {V.shape}")
    err = float(np.abs(V.T @ V - np.eye(V.shape[1])).max()) if V.shape[1] else 0.0
    if err > ORTHONORMAL_TOL:
        raise InputError(f"basis columns are not orthonormal (max error {err:.3g})")
    return V


def _captured(S, V):
    # sum_j v_j^T S v_j
    return float(np.einsum("ij,ik,kj->", V, S, V))


def reconstruction_loss(S, trace, V):
    """``trace - sum_j v_j^T S v_j`` for orthonormal columns ``V``."""
    S = np.asarray(S, dtype=np.float64)
    V = _orthonormal_columns(V, S.shape[0])
    return float(trace) - _captured(S, V)


def marginal_loss(S, V):
    """Best rank-``r`` energy of ``S`` minus the energy captured by ``V``."""
    S = np.asarray(S, dtype=np.float64)
    V = _orthonormal_columns(V, S.shape[0])
    r = V.shape[1]
    if r == 0:
        return 0.0
    best = eig.top_k_eigenvalues(S, r)
    return float(best.sum()) - _captured(S, V)


def incremental_loss(gram_set, basis, group, r):
    """Sum of the first ``r`` per-iteration losses of ``group`` in ``basis``."""
    if not 0 <= group < gram_set.k:
        raise InputError(f"group index {group} out of range for {gram_set.k} groups")
    if not 1 <= r <= basis.d:
        raise InputError(f"rank {r} must lie in [1, {basis.d}]")
    return float(sum(res.h[group] for res in basis.per_iteration[:r]))


def replay_incremental(gram_set, components, method="dense"):
    """Per-iteration losses recomputed from the original Grams.

    ``components`` holds the basis vectors as rows. Returns a ``k x d``
    array whose column ``j`` is ``h`` at ``v_j`` on the Grams deflated by
    ``v_1 .. v_{j-1}``.
    """
    C = np.atleast_2d(np.asarray(components, dtype=np.float64))
    out = np.empty((gram_set.k, C.shape[0]))
    current = gram_set
    for j, v in enumerate(C):
        out[:, j] = current.top_eigenvalues - kernels.quad_forms(current.grams, v)
        if j + 1 < C.shape[0]:
            current = deflate(current, v, method=method)
    return out


@dataclass(frozen=True)
class StandardBasis:
    """Top eigenvectors of the pooled Gram, as columns of ``V`` (``n x d``)."""

    V: np.ndarray
    eigenvalues: np.ndarray
    degenerate: bool


def standard_pca_basis(pooled, d):
    """Standard PCA on the pooled Gram ``sum_i S_i``.

    ``degenerate`` is set when two of the leading ``d + 1`` eigenvalues are
    (relatively) tied, in which case the returned columns are one
    deterministic choice among many.
    """
    pooled = eig.as_symmetric(pooled)
    n = pooled.shape[0]
    if not 1 <= d <= n:
        raise InputError(f"rank {d} must lie in [1, {n}] (feature count {n})")
    w, V = eig.eigh_descending(pooled)
    head = w[: min(d + 1, n)]
    scale = max(float(w[0]), np.finfo(float).tiny)
    degenerate = bool(np.any(np.diff(head) > -DEGENERACY_REL * scale)) if head.size > 1 else False
    return StandardBasis(np.ascontiguousarray(V[:, :d]), w[:d].copy(), degenerate)


@dataclass(frozen=True, eq=False)
class LossReport:
    """Losses of one method; arrays are ``k x d`` (group by rank)."""

    method: str
    group_labels: tuple
    ranks: tuple
    marginal: np.ndarray
    incremental: np.ndarray
    reconstruction: np.ndarray
    duality_gaps: np.ndarray = None

    def rows(self):
        """Flat records ``(method, group, rank, marginal, incremental,
        reconstruction, duality_gap)``, ordered by group then rank."""
        out = []
        for i, lab in enumerate(self.group_labels):
            for j, r in enumerate(self.ranks):
                gap = None if self.duality_gaps is None else float(self.duality_gaps[j])
                out.append((self.method, lab, r, float(self.marginal[i, j]),
                            float(self.incremental[i, j]),
                            float(self.reconstruction[i, j]), gap))
        return out


def _prefix_losses(gram_set, V):
    k, d = gram_set.k, V.shape[1]
    marg = np.empty((k, d))
    rec = np.empty((k, d))
    for i, S in enumerate(gram_set.grams):
        best = np.cumsum(eig.top_k_eigenvalues(S, d))
        cap = np.cumsum(np.einsum("ij,ik,kj->j", V, S, V))
        marg[i] = best - cap
        rec[i] = gram_set.traces[i] - cap
    return marg, rec


def loss_report(gram_set, V, incremental, labels, method, gaps=None):
    V = _orthonormal_columns(V, gram_set.n)
    marg, rec = _prefix_losses(gram_set, V)
    d = V.shape[1]
    return LossReport(method, tuple(labels), tuple(range(1, d + 1)), marg,
                      np.cumsum(incremental, axis=1), rec,
                      None if gaps is None else np.asarray(gaps, dtype=np.float64))


def build_loss_report(dataset, d, config=DEFAULT_CONFIG, gram_set=None):
    """Fair and standard-PCA loss reports at every rank ``1..d``.

    Both bases are fit once at rank ``d``; the rank-``r`` entries use their
    first ``r`` columns. Returns ``(fair_report, standard_report, basis)``.
    """
    gs = build_gram_set(dataset, method=config.eig_method) if gram_set is None else gram_set
    basis = fit(gs, d, config, complete=True)
    inc = np.array([res.h for res in basis.per_iteration]).T
    gaps = [res.duality_gap for res in basis.per_iteration]
    fair = loss_report(gs, basis.V, inc, dataset.labels, FAIR, gaps)

    std = standard_pca_basis(gs.pooled(), d)
    std_inc = replay_incremental(gs, std.V.T, method=config.eig_method)
    standard = loss_report(gs, std.V, std_inc, dataset.labels, STANDARD)
    return fair, standard, basis
