"""Sketching operators and sketch-size rules.

Four operator families are provided, all acting on the row dimension of a
matrix from the left (``S @ A``) or on the column dimension from the right
(``A @ S.T``):

* :class:`SparseEmbedding` (CountSketch): one ``+-1`` per input coordinate,
  applied in a single pass over the stored entries of ``A``.
* :class:`GaussianSketch`: dense i.i.d. ``N(0, 1/s)`` entries.
* :class:`LeverageScoreSketch`: row sampling with replacement from the
  leverage-score distribution, with ``1/sqrt(l_i * s)`` rescaling.
* :class:`ComposedSketch`: a Gaussian sketch applied after a sparse
  embedding, ``S = G @ Pi``; ``G @ Pi`` itself is never formed.

Operators never materialize a dense ``s x m`` array unless ``to_dense`` is
called explicitly (tests use it as the reference product).
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import _rng
from .linalg import DEFAULT_RANK_TOL, as_sparse, is_sparse, shape_mismatch, svd


@dataclass
class TouchCounter:
    """Accumulates how many stored entries of the data matrix were read."""

    entries: int = 0

    def add(self, k):
        self.entries += int(k)


def _count(counter, k):
    if counter is not None:
        counter.add(k)


def _check_rows(S, A, side="left"):
    dim = A.shape[0] if side == "left" else A.shape[1]
    if dim != S.input_dim:
        op = "S @ A" if side == "left" else "A @ S.T"
        raise shape_mismatch(op, S.shape, A.shape)


def _csr(A):
    if A.format != "csr":
        A = as_sparse(A)
    return A


# -- sparse embedding ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SparseEmbedding:
    """CountSketch ``Pi`` of shape ``(sketch_dim, input_dim)``.

    Column ``i`` of ``Pi`` has a single entry ``signs[i]`` in row
    ``buckets[i]``. Entries are ``+-1`` without ``1/sqrt`` scaling.
    """

    input_dim: int
    sketch_dim: int
    buckets: np.ndarray
    signs: np.ndarray
    seed: int

    @property
    def shape(self):
        return (self.sketch_dim, self.input_dim)

    def to_dense(self):
        S = np.zeros(self.shape)
        S[self.buckets, np.arange(self.input_dim)] = self.signs
        return S

    def to_sparse(self):
        indptr = np.arange(self.input_dim + 1)
        return scipy.sparse.csc_array((self.signs, self.buckets, indptr), shape=self.shape)

    def apply_left(self, A, counter=None):
        return apply_sparse_embedding_left(self, A, counter)

    def apply_right(self, A, counter=None):
        return apply_sparse_embedding_right(self, A, counter)


def build_sparse_embedding(m, s, seed):
    """Draw a CountSketch with ``s`` buckets for ``m``-dimensional inputs."""
    if s < 1:
        raise ValueError(f"sketch dimension must be >= 1, got {s}")
    if m < 1:
        raise ValueError(f"input dimension must be >= 1, got {m}")
    rng = _rng.generator(seed)
    buckets = rng.integers(0, s, size=m, dtype=np.int64)
    signs = rng.integers(0, 2, size=m, dtype=np.int8).astype(np.float64) * 2.0 - 1.0
    return SparseEmbedding(int(m), int(s), buckets, signs, int(seed))


def apply_sparse_embedding_left(S, A, counter=None):
    """Compute ``S @ A`` in one pass over the stored entries of ``A``.

    Row ``i`` of ``A`` is added, times ``signs[i]``, into output row
    ``buckets[i]``. Cost is ``O(nnz(A) + s * cols)`` for sparse ``A``.
    """
    _check_rows(S, A, "left")
    m, k = A.shape
    if is_sparse(A):
        A = _csr(A)
        _count(counter, A.nnz)
        per_row = np.diff(A.indptr)
        out_row = np.repeat(S.buckets, per_row)
        vals = A.data * np.repeat(S.signs, per_row)
        flat = np.bincount(out_row * k + A.indices, weights=vals, minlength=S.sketch_dim * k)
        return flat.reshape(S.sketch_dim, k)
    _count(counter, A.size)
    return np.ascontiguousarray(S.to_sparse() @ A)


def apply_sparse_embedding_right(S, A, counter=None):
    """Compute ``A @ S.T``, hashing the columns of ``A`` into buckets."""
    _check_rows(S, A, "right")
    k, n = A.shape
    if is_sparse(A):
        A = _csr(A)
        _count(counter, A.nnz)
        row = np.repeat(np.arange(k, dtype=np.int64), np.diff(A.indptr))
        vals = A.data * S.signs[A.indices]
        flat = np.bincount(row * S.sketch_dim + S.buckets[A.indices], weights=vals,
                           minlength=k * S.sketch_dim)
        return flat.reshape(k, S.sketch_dim)
    _count(counter, A.size)
    return np.ascontiguousarray((S.to_sparse() @ A.T).T)


# -- gaussian -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianSketch:
    """Dense ``(sketch_dim, input_dim)`` matrix of i.i.d. ``N(0, 1/sketch_dim)``."""

    input_dim: int
    sketch_dim: int
    matrix: np.ndarray
    seed: int

    @property
    def shape(self):
        return self.matrix.shape

    def to_dense(self):
        return self.matrix.copy()

    def apply_left(self, A, counter=None):
        return apply_gaussian_left(self, A, counter)

    def apply_right(self, A, counter=None):
        _check_rows(self, A, "right")
        if is_sparse(A):
            _count(counter, A.nnz)
        else:
            _count(counter, A.size)
        return np.ascontiguousarray(np.asarray(A @ self.matrix.T))


def build_gaussian(t, s, seed):
    if s < 1 or t < 1:
        raise ValueError(f"gaussian sketch needs positive dimensions, got s={s}, t={t}")
    rng = _rng.generator(seed)
    G = rng.standard_normal((s, t)) / math.sqrt(s)
    return GaussianSketch(int(t), int(s), G, int(seed))


def apply_gaussian_left(G, A, counter=None):
    _check_rows(G, A, "left")
    if is_sparse(A):
        _count(counter, A.nnz)
        return np.ascontiguousarray(np.asarray(A.T @ G.matrix.T).T)
    _count(counter, A.size)
    return G.matrix @ A


# -- leverage scores ----------------------------------------------------------


def compute_leverage_scores(M, rank_tol=DEFAULT_RANK_TOL):
    """Leverage-score distribution over the rows of ``M``.

    With ``U`` an orthonormal basis of the column space of ``M`` (rank
    ``k``), the score of row ``i`` is ``||U[i, :]||^2 / k``. Scores are exact
    (computed from the SVD, ``O(m c^2)``).
    """
    f = svd(M, rank_tol)
    if f.rank == 0:
        raise ValueError("no column space to sample: matrix is numerically zero")
    return np.einsum("ij,ij->i", f.U, f.U) / f.rank


@dataclass(frozen=True, eq=False)
class LeverageScoreSketch:
    """Row-sampling sketch ``S = (Omega D)^T`` of shape ``(len(indices), input_dim)``.

    ``(S @ A)[j] = scales[j] * A[indices[j]]`` with
    ``scales[j] = 1 / sqrt(scores[indices[j]] * len(indices))``.
    """

    input_dim: int
    indices: np.ndarray
    scales: np.ndarray
    scores: np.ndarray
    seed: int

    @property
    def sketch_dim(self):
        return self.indices.shape[0]

    @property
    def shape(self):
        return (self.sketch_dim, self.input_dim)

    def to_dense(self):
        S = np.zeros(self.shape)
        S[np.arange(self.sketch_dim), self.indices] = self.scales
        return S

    def apply_left(self, A, counter=None):
        return apply_leverage_sketch_rows(self, A, counter)

    def apply_right(self, A, counter=None):
        """``A @ S.T``: the sampled columns of ``A``, rescaled."""
        _check_rows(self, A, "right")
        if is_sparse(A):
            cols = A.tocsc()[:, self.indices]
            _count(counter, cols.nnz)
            return np.ascontiguousarray(cols.toarray() * self.scales)
        _count(counter, A.shape[0] * self.sketch_dim)
        return A[:, self.indices] * self.scales


def build_leverage_sketch(scores, r_s, seed):
    """Sample ``r_s`` row indices i.i.d. from ``scores``, with replacement."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("scores must be a non-empty 1-D vector")
    if np.any(scores < 0) or not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite and non-negative")
    total = scores.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"scores must sum to 1 within 1e-8, got {total!r}")
    if r_s < 1:
        raise ValueError(f"sample count must be >= 1, got {r_s}")
    rng = _rng.generator(seed)
    cdf = np.cumsum(scores)
    cdf /= cdf[-1]
    # side="right" never lands on a zero-probability index
    idx = np.searchsorted(cdf, rng.random(r_s), side="right")
    idx = np.minimum(idx, scores.size - 1)
    scales = 1.0 / np.sqrt(scores[idx] * r_s)
    return LeverageScoreSketch(scores.size, idx.astype(np.int64), scales, scores, int(seed))


def apply_leverage_sketch_rows(S, A, counter=None):
    """``S @ A``, reading only the sampled rows of ``A``."""
    _check_rows(S, A, "left")
    if is_sparse(A):
        rows = _csr(A)[S.indices]
        _count(counter, rows.nnz)
        return np.ascontiguousarray(rows.toarray() * S.scales[:, None])
    _count(counter, S.sketch_dim * A.shape[1])
    return A[S.indices] * S.scales[:, None]


# -- composition and identity -------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComposedSketch:
    """``S = outer @ inner`` with a Gaussian ``outer`` and a sparse ``inner``."""

    outer: GaussianSketch
    inner: SparseEmbedding

    def __post_init__(self):
        if self.outer.input_dim != self.inner.sketch_dim:
            raise shape_mismatch("composed sketch (G, Pi)", self.outer.shape, self.inner.shape)

    @property
    def input_dim(self):
        return self.inner.input_dim

    @property
    def sketch_dim(self):
        return self.outer.sketch_dim

    @property
    def shape(self):
        return (self.sketch_dim, self.input_dim)

    def to_dense(self):
        return self.outer.matrix @ self.inner.to_dense()

    def apply_left(self, A, counter=None):
        return apply_composed_left(self, A, counter)

    def apply_right(self, A, counter=None):
        _check_rows(self, A, "right")
        return self.outer.apply_right(self.inner.apply_right(A, counter))


def build_composed(m, t, s, seed):
    """Sparse embedding ``m -> t`` followed by a Gaussian ``t -> s``."""
    inner = build_sparse_embedding(m, t, _rng.derive_seed(seed, _rng.STREAM_INNER))
    outer = build_gaussian(t, s, _rng.derive_seed(seed, _rng.STREAM_OUTER))
    return ComposedSketch(outer, inner)


def apply_composed_left(C, A, counter=None):
    """``G @ (Pi @ A)``; only the ``Pi`` stage reads ``A`` and is counted."""
    _check_rows(C, A, "left")
    return C.outer.apply_left(C.inner.apply_left(A, counter))


@dataclass(frozen=True)
class IdentitySketch:
    """The ``dim x dim`` identity, for control runs."""

    input_dim: int

    @property
    def sketch_dim(self):
        return self.input_dim

    @property
    def shape(self):
        return (self.input_dim, self.input_dim)

    def to_dense(self):
        return np.eye(self.input_dim)

    def apply_left(self, A, counter=None):
        _check_rows(self, A, "left")
        _count(counter, A.nnz if is_sparse(A) else A.size)
        return A.toarray() if is_sparse(A) else np.array(A, dtype=np.float64)

    def apply_right(self, A, counter=None):
        _check_rows(self, A, "right")
        _count(counter, A.nnz if is_sparse(A) else A.size)
        return A.toarray() if is_sparse(A) else np.array(A, dtype=np.float64)


# -- sizing -------------------------------------------------------------------

METHODS = ("sparse-gaussian", "leverage")


@dataclass(frozen=True)
class SketchPlan:
    """Accuracy target, embedding distortion and the constants that size sketches.

    ``delta`` is carried for reporting only; sketch sizes do not depend on it.
    """

    epsilon: float
    epsilon0: float = 0.5
    delta: float = 0.1
    c_embed: float = 4.0
    c_prod: float = 4.0
    c_log: float = 2.0
    seed: int = 0

    def __post_init__(self):
        for name in ("epsilon", "epsilon0", "delta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        for name in ("c_embed", "c_prod", "c_log"):
            if getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class SketchDims:
    s_c: int
    s_r: int
    t: int | None = None
    t_prime: int | None = None

    def as_dict(self):
        return {"s_c": self.s_c, "s_r": self.s_r, "t": self.t, "t_prime": self.t_prime}


def _ceil(x):
    # absorb representation noise such as 8 / 0.1 = 80.00000000000001
    return math.ceil(x * (1.0 - 1e-12))


def _sizes(plan, d, method):
    eps = plan.epsilon
    if method == "sparse-gaussian":
        s = max(_ceil(plan.c_prod * d / eps), d + 1)
        t = max(_ceil(plan.c_embed * (d / eps + d * d)), s)
        return s, t
    if method == "leverage":
        s = _ceil(plan.c_prod * d / eps + plan.c_log * d * math.log(d + 1))
        return max(s, d + 1), None
    raise ValueError(f"unknown sketching method {method!r}; expected one of {METHODS}")


def plan_dims(plan, c, r, method):
    """Sketch sizes for an ``m x c`` left factor and an ``r x n`` right factor.

    sparse-gaussian: ``t = ceil(c_embed (c/eps + c^2))`` and
    ``s_c = ceil(c_prod c/eps)``; leverage:
    ``s_c = ceil(c_prod c/eps + c_log c ln(c+1))``. The same rules give
    ``t'`` and ``s_r`` from ``r``. Every sketch size is at least ``c + 1``
    (resp. ``r + 1``) and ``t >= s_c``.
    """
    if c < 1 or r < 1:
        raise ValueError(f"c and r must be >= 1, got c={c}, r={r}")
    s_c, t = _sizes(plan, c, method)
    s_r, t_prime = _sizes(plan, r, method)
    return SketchDims(s_c, s_r, t, t_prime)
