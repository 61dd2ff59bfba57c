"""Grouped data, per-group Gram matrices and the deflation step.

Every quantity downstream of ingestion is a functional of the per-group Gram
matrices ``S_i = A_i^T A_i``, so the solver state is a :class:`GramSet`
rather than the data matrices themselves. Deflating along a unit vector
``v`` in Gram space, ``S_i <- (I - v v^T) S_i (I - v v^T)``, is exactly the
Gram of the deflated data ``A_i - A_i v v^T``.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import eig
from .errors import DimensionMismatchError, InputError, NotUnitVectorError, SolverError

UNIT_TOL = 1e-10
SYMMETRY_REL = 1e-10
ORTHONORMAL_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def require_unit(v, n=None):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or (n is not None and v.shape[0] != n):
        raise InputError(f"expected a vector of length {n}, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_TOL:
        raise NotUnitVectorError(norm)
    return v


@dataclass(frozen=True, eq=False)
class GroupedDataset:
    """Row-grouped data: one ``m_i x n`` matrix per group, in a fixed order."""

    labels: tuple
    matrices: tuple
    feature_names: tuple = None

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        mats = tuple(_frozen(np.atleast_2d(m)) for m in self.matrices)
        if not mats or len(labels) != len(mats):
            raise InputError("need one label per group and at least one group")
        if len(set(labels)) != len(labels):
            raise InputError("group labels must be distinct")
        n = mats[0].shape[1]
        for lab, m in zip(labels, mats):
            if m.ndim != 2:
                raise DimensionMismatchError(f"group {lab!r} is not a matrix", group=lab)
            if m.shape[1] != n:
                raise DimensionMismatchError(
                    f"group {lab!r} has {m.shape[1]} columns, expected {n}", group=lab)
            if m.shape[0] < 1:
                raise InputError(f"group {lab!r} has no rows")
        names = self.feature_names
        names = tuple(f"x{j}" for j in range(n)) if names is None else tuple(map(str, names))
        if len(names) != n:
            raise InputError(f"{len(names)} feature names for {n} columns")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self):
        return self.matrices[0].shape[1]

    @property
    def k(self):
        return len(self.matrices)

    @property
    def sizes(self):
        return tuple(m.shape[0] for m in self.matrices)

    def centered(self):
        """Copy with every group's columns centred independently."""
        return GroupedDataset(self.labels, [m - m.mean(axis=0) for m in self.matrices],
                              self.feature_names)


@dataclass(frozen=True, eq=False)
class GramSet:
    """Per-group Grams with cached leading eigenvalues ``s_i`` and traces."""

    grams: np.ndarray
    top_eigenvalues: np.ndarray
    traces: np.ndarray

    def __post_init__(self):
        G = _frozen(self.grams)
        if G.ndim != 3 or G.shape[1] != G.shape[2] or G.shape[0] < 1:
            raise InputError(f"grams must have shape (k, n, n), got {G.shape}")
        s = _frozen(self.top_eigenvalues)
        tr = _frozen(self.traces)
        if s.shape != (G.shape[0],) or tr.shape != (G.shape[0],):
            raise InputError("need one top eigenvalue and one trace per group")
        for i, S in enumerate(G):
            scale = float(np.abs(S).max())
            if float(np.abs(S - S.T).max()) > SYMMETRY_REL * scale:
                raise InputError(f"gram {i} is not symmetric")
        if np.any(s < 0):
            raise InputError("top eigenvalues must be nonnegative")
        if np.any(s > tr + 1e-9 * np.abs(tr) + 1e-12):
            raise InputError("a top eigenvalue exceeds its gram's trace")
        object.__setattr__(self, "grams", G)
        object.__setattr__(self, "top_eigenvalues", s)
        object.__setattr__(self, "traces", tr)

    @classmethod
    def from_grams(cls, grams, method="dense"):
        G = np.array(grams, dtype=np.float64)
        if G.ndim == 2:
            G = G[None]
        G = 0.5 * (G + np.swapaxes(G, 1, 2))
        s = [eig.leading_eigenpair(S, method=method).value for S in G]
        return cls(G, np.array(s), np.trace(G, axis1=1, axis2=2))

    @property
    def n(self):
        return self.grams.shape[1]

    @property
    def k(self):
        return self.grams.shape[0]

    def pooled(self):
        return self.grams.sum(axis=0)


def build_gram_set(dataset, method="dense"):
    """``S_i = A_i^T A_i`` for every group, plus ``s_i`` and traces."""
    n = dataset.matrices[0].shape[1]
    grams = []
    for lab, A in zip(dataset.labels, dataset.matrices):
        if A.shape[1] != n:
            raise DimensionMismatchError(
                f"group {lab!r} has {A.shape[1]} columns, expected {n}", group=lab)
        grams.append(A.T @ A)
    return GramSet.from_grams(grams, method=method)


def deflate(gram_set, v, method="dense"):
    """Project every Gram onto the orthogonal complement of unit ``v``.

    Uses the rank-2 form ``S - v w^T - w v^T + (v^T S v) v v^T`` with
    ``w = S v``, which equals ``P S P`` for ``P = I - v v^T``. The result is
    symmetrised and its top eigenvalues recomputed from scratch.
    """
    v = require_unit(v, gram_set.n)
    out = np.empty_like(gram_set.grams)
    for i, S in enumerate(gram_set.grams):
        w = S @ v
        D = S - np.outer(v, w) - np.outer(w, v) + (v @ w) * np.outer(v, v)
        out[i] = 0.5 * (D + D.T)
    return GramSet.from_grams(out, method=method)


class Solver(str, Enum):
    BRENT = "Brent"
    FRANK_WOLFE = "FrankWolfe"
    SINGLE_GROUP = "SingleGroup"
    # orthonormal completion after every group's residual vanished
    COMPLETION = "Completion"


@dataclass(frozen=True, eq=False)
class DualWeights:
    """A point on the probability simplex; tiny negatives are clamped to 0."""

    mu: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64).reshape(-1)
        if mu.size < 1:
            raise InputError("dual weights must be non-empty")
        if np.any(mu < -1e-12):
            raise InputError(f"dual weights must be nonnegative, got {mu}")
        mu = np.maximum(mu, 0.0)
        if abs(mu.sum() - 1.0) > 1e-9:
            raise InputError(f"dual weights must sum to 1, got {mu.sum()!r}")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def __len__(self):
        return self.mu.size


@dataclass(frozen=True, eq=False)
class FairComponentResult:
    """One rank-1 solution. ``primal_value`` is always ``max(h)``."""

    v: np.ndarray
    mu: DualWeights
    dual_value: float
    h: np.ndarray
    solver: Solver
    iterations: int
    converged: bool = True
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "v", _frozen(require_unit(self.v)))
        object.__setattr__(self, "h", _frozen(self.h))
        if not isinstance(self.mu, DualWeights):
            object.__setattr__(self, "mu", DualWeights(self.mu))
        object.__setattr__(self, "dual_value", float(self.dual_value))
        object.__setattr__(self, "solver", Solver(self.solver))
        z = self.primal_value
        if self.duality_gap < -1e-8 * max(1.0, abs(z)):
            raise SolverError(f"negative duality gap {self.duality_gap!r} (z={z!r})")

    @property
    def primal_value(self):
        return float(self.h.max())

    @property
    def duality_gap(self):
        return self.primal_value - self.dual_value


@dataclass(frozen=True, eq=False)
class FairBasis:
    """Ordered orthonormal components (rows of ``components``)."""

    components: np.ndarray
    per_iteration: tuple
    rank_deficient: bool = False

    def __post_init__(self):
        C = _frozen(self.components)
        if C.ndim != 2:
            raise InputError("components must be a (d, n) array")
        if len(self.per_iteration) != C.shape[0]:
            raise InputError("one per-iteration result per component")
        if C.shape[0] and float(np.abs(C @ C.T - np.eye(C.shape[0])).max()) > ORTHONORMAL_TOL:
            raise SolverError("components are not orthonormal")
        object.__setattr__(self, "components", C)
        object.__setattr__(self, "per_iteration", tuple(self.per_iteration))

    @property
    def d(self):
        return self.components.shape[0]

    @property
    def n(self):
        return self.components.shape[1]

    @property
    def V(self):
        """Components as columns, ``n x d``."""
        return self.components.T
