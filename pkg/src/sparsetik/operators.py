"""Forward operators acting on truncated coefficient sequences.

Two storage forms are supported: a dense ``M x N`` matrix and a diagonal
(singular value) form. The data space is always R^M with its canonical
basis.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import ndtri
from scipy.stats import qmc

from sparsetik.errors import DimensionError, FBIViolationError, PreconditionError
from sparsetik.seqspace import as_sequence

FBI_RTOL = 1e-10


class DenseOperator:
    def __init__(self, matrix):
        A = np.array(matrix, dtype=float, ndmin=2)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise DimensionError(f"operator matrix must be 2-d and non-empty, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise PreconditionError("operator matrix has non-finite entries")
        A.flags.writeable = False
        self.matrix = A

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, u):
        u = as_sequence(u)
        if u.shape[0] != self.shape[1]:
            raise DimensionError(f"input has length {u.shape[0]}, operator expects {self.shape[1]}")
        return self.matrix @ u

    def adjoint(self, r):
        r = as_sequence(r, "r")
        if r.shape[0] != self.shape[0]:
            raise DimensionError(f"data has length {r.shape[0]}, operator expects {self.shape[0]}")
        return self.matrix.T @ r

    def norm(self):
        return float(np.linalg.svd(self.matrix, compute_uv=False)[0])

    def to_dense(self):
        return self

    def __repr__(self):
        return f"DenseOperator(shape={self.shape})"


class DiagonalOperator:
    def __init__(self, singular_values):
        s = as_sequence(singular_values, "singular_values").copy()
        if np.any(s < 0):
            raise PreconditionError("singular values must be non-negative")
        if not np.any(s > 0):
            raise PreconditionError("at least one singular value must be positive")
        s.flags.writeable = False
        self.singular_values = s

    @property
    def shape(self):
        n = self.singular_values.shape[0]
        return (n, n)

    def apply(self, u):
        u = as_sequence(u)
        if u.shape[0] != self.shape[1]:
            raise DimensionError(f"input has length {u.shape[0]}, operator expects {self.shape[1]}")
        return self.singular_values * u

    def adjoint(self, r):
        r = as_sequence(r, "r")
        if r.shape[0] != self.shape[0]:
            raise DimensionError(f"data has length {r.shape[0]}, operator expects {self.shape[0]}")
        return self.singular_values * r

    def norm(self):
        return float(self.singular_values.max())

    def to_dense(self):
        return DenseOperator(np.diag(self.singular_values))

    def __repr__(self):
        return f"DiagonalOperator(N={self.shape[1]})"


class DenseNetOperator(DenseOperator):
    """Columns are unit vectors forming a finite net on the unit sphere of R^M.

    ``resolution`` is the estimated covering radius: the largest distance
    from a probe direction to its nearest column.
    """

    def __init__(self, columns, resolution: float):
        super().__init__(columns)
        norms = np.linalg.norm(self.matrix, axis=0)
        if np.any(np.abs(norms - 1) > 1e-12):
            raise PreconditionError("net columns must have unit norm")
        self.resolution = float(resolution)

    @property
    def columns(self):
        return self.matrix

    def __repr__(self):
        return f"DenseNetOperator(M={self.shape[0]}, L={self.shape[1]}, resolution={self.resolution:.3g})"


def apply(K, u):
    return K.apply(u)


def adjoint_apply(K, r):
    return K.adjoint(r)


def operator_norm(K) -> float:
    return K.norm()


def pseudo_inverse_apply(K: DiagonalOperator, g):
    """Minimum-norm least-squares inverse of a diagonal operator."""
    g = as_sequence(g, "g")
    s = K.singular_values
    if g.shape[0] != s.shape[0]:
        raise DimensionError("data length does not match operator")
    out = np.zeros_like(g)
    pos = s > 0
    out[pos] = g[pos] / s[pos]
    return out


def _restricted_svals(K, index_set):
    idx = np.asarray(list(index_set), dtype=int)
    if idx.size == 0:
        raise PreconditionError("index set must be nonempty")
    A = K.to_dense().matrix
    if idx.min() < 0 or idx.max() >= A.shape[1]:
        raise PreconditionError(f"indices must lie in [0, {A.shape[1]})")
    return np.linalg.svd(A[:, idx], compute_uv=False)


def fbi_check(K, index_set) -> bool:
    """Injectivity of K restricted to the coordinates in ``index_set``."""
    sv = _restricted_svals(K, index_set)
    if len(sv) < len(set(index_set)) or sv[0] == 0:
        return False
    return bool(sv[-1] > FBI_RTOL * sv[0])


def restricted_smallest_singular_value(K, index_set) -> float:
    if not fbi_check(K, index_set):
        raise FBIViolationError(f"operator is not injective on indices {list(index_set)}")
    return float(_restricted_svals(K, index_set)[-1])


def _sphere_points(n: int, M: int, seed: int, scrambled=True) -> np.ndarray:
    """Quasi-uniform directions: scrambled Sobol points pushed through the
    normal quantile function and normalized. Returns an ``M x n`` array."""
    sampler = qmc.Sobol(d=M, scramble=scrambled, seed=seed)
    with warnings.catch_warnings():
        # balance warning for n not a power of two; prefixes are still nested
        warnings.simplefilter("ignore", UserWarning)
        pts = sampler.random(n)
    pts = np.clip(pts, 1e-12, 1 - 1e-12)
    z = ndtri(pts).T
    return z / np.linalg.norm(z, axis=0)


def net_resolution(columns: np.ndarray, seed: int = 0, n_probes: int | None = None) -> float:
    """Estimate the covering radius of unit columns by random probing."""
    M, L = columns.shape
    if n_probes is None:
        n_probes = max(10 * L, 4096)
    rng = np.random.default_rng(seed)
    probes = rng.standard_normal((n_probes, M))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    dist, _ = cKDTree(columns.T).query(probes, k=1)
    return float(dist.max())


def build_dense_net(M: int, L: int, seed: int = 0, scheme: str | None = None) -> DenseNetOperator:
    """Finite net of ``L`` unit vectors in R^M.

    ``scheme="angles"`` (the default for M=2) places the columns at equal
    angles starting at angle 0, so nets whose sizes divide each other are
    nested. ``scheme="sobol"`` uses seeded low-discrepancy directions; a
    larger L with the same seed extends the smaller net.
    """
    if M < 2 or L < 1:
        raise PreconditionError("need M >= 2 and L >= 1")
    if scheme is None:
        scheme = "angles" if M == 2 else "sobol"
    if scheme == "angles":
        if M != 2:
            raise PreconditionError("equal-angle nets exist only for M = 2")
        theta = 2 * np.pi * np.arange(L) / L
        cols = np.vstack([np.cos(theta), np.sin(theta)])
    elif scheme == "sobol":
        cols = _sphere_points(L, M, seed)
    else:
        raise PreconditionError(f"unknown net scheme {scheme!r}")
    cols /= np.linalg.norm(cols, axis=0)
    return DenseNetOperator(cols, net_resolution(cols, seed=seed))
