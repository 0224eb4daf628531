"""Dense and sparse matrix primitives.

Dense matrices are plain C-contiguous ``float64`` ndarrays and sparse
matrices are canonical ``scipy.sparse.csr_array`` objects (sorted column
indices, no duplicates, no explicit zeros). The helpers here validate those
conventions once, at the boundary, and provide the factorizations and norms
used by the sketches and solvers.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

DEFAULT_RANK_TOL = 1e-12


class SvdConvergenceError(np.linalg.LinAlgError):
    """Raised when every LAPACK SVD driver fails to converge.

    ``unconverged`` is the count of superdiagonals of the intermediate
    bidiagonal form that did not converge (LAPACK ``info``).
    """

    def __init__(self, unconverged, shape):
        self.unconverged = unconverged
        self.shape = shape
        super().__init__(
            f"SVD of {shape[0]}x{shape[1]} matrix did not converge: "
            f"{unconverged} superdiagonal(s) unconverged after the QR iteration limit"
        )


@dataclass(frozen=True)
class SvdFactors:
    """Condensed SVD ``A = U @ diag(sigma) @ Vt`` keeping only ``sigma > 0``."""

    U: np.ndarray
    sigma: np.ndarray
    Vt: np.ndarray

    @property
    def rank(self):
        return self.sigma.shape[0]


def is_sparse(A):
    return scipy.sparse.issparse(A)


def shape_mismatch(what, *shapes):
    dims = ", ".join("x".join(str(d) for d in s) for s in shapes)
    return ValueError(f"{what}: incompatible shapes ({dims})")


def as_dense(A, name="matrix"):
    """Validate and return ``A`` as a finite, 2-D, C-contiguous float64 array."""
    if is_sparse(A):
        raise TypeError(f"{name} must be dense, got a sparse matrix")
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return A


def as_sparse(A, name="matrix"):
    """Return ``A`` as a canonical CSR array.

    Duplicate coordinates are summed and explicit zeros dropped, so the
    stored entry count equals ``nnz``. Column indices are sorted within each
    row, which is what :func:`sparse_lookup` relies on for binary search.
    """
    A = scipy.sparse.csr_array(A, dtype=np.float64, copy=True)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    if not np.all(np.isfinite(A.data)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return A


def as_matrix(A, name="matrix"):
    """Dense or canonical sparse, depending on what was passed in."""
    return as_sparse(A, name) if is_sparse(A) else as_dense(A, name)


def nnz(A):
    """Number of stored nonzeros (sparse) or of nonzero entries (dense)."""
    if is_sparse(A):
        return int(A.nnz)
    return int(np.count_nonzero(A))


def sparse_lookup(A, rows, cols):
    """Read ``A[rows[k], cols[k]]`` for every k from a canonical CSR array.

    Each probe is a binary search within one row, so the cost is
    ``O(len(rows) * log(max_row_nnz))`` and no other stored entry is touched.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    out = np.zeros(rows.shape, dtype=np.float64)
    if A.nnz == 0 or rows.size == 0:
        return out
    indptr = A.indptr.astype(np.int64, copy=False)
    indices = A.indices
    last = indices.shape[0] - 1
    lo = indptr[rows]
    end = indptr[rows + 1]
    hi = end.copy()
    active = lo < hi
    # vectorized lower_bound over all probes at once
    while active.any():
        mid = (lo + hi) // 2
        right = active & (indices[np.minimum(mid, last)] < cols)
        lo = np.where(right, mid + 1, lo)
        hi = np.where(active & ~right, mid, hi)
        active = lo < hi
    pos = np.minimum(lo, last)
    hit = (lo < end) & (indices[pos] == cols)
    out[hit] = A.data[pos[hit]]
    return out


def _lapack_svd(A):
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    # gesdd failed; gesvd is slower but more robust and reports info
    u, s, vt, info = scipy.linalg.lapack.dgesvd(A, full_matrices=0)
    if info > 0:
        raise SvdConvergenceError(int(info), A.shape)
    if info < 0:
        raise ValueError(f"dgesvd: illegal value in argument {-info}")
    return u, s, vt


def svd(A, rank_tol=DEFAULT_RANK_TOL):
    """Condensed singular value decomposition.

    Parameters
    ----------
    A : (m, n) array_like
        Dense input with finite entries.
    rank_tol : float
        Singular values ``sigma_i <= rank_tol * sigma_1`` are treated as zero
        and dropped together with their singular vectors.

    Returns
    -------
    SvdFactors
        ``U`` is ``(m, rho)``, ``sigma`` has length ``rho`` in nonincreasing
        order and ``Vt`` is ``(rho, n)``. An all-zero ``A`` gives ``rho = 0``.

    Raises
    ------
    SvdConvergenceError
        If neither LAPACK driver converges.
    """
    A = as_dense(A)
    m, n = A.shape
    if m == 0 or n == 0:
        raise ValueError(f"svd of empty {m}x{n} matrix")
    u, s, vt = _lapack_svd(A)
    keep = int(np.count_nonzero(s > rank_tol * s[0])) if s[0] > 0 else 0
    return SvdFactors(
        U=np.ascontiguousarray(u[:, :keep]),
        sigma=s[:keep].copy(),
        Vt=np.ascontiguousarray(vt[:keep]),
    )


def rank(A, rank_tol=DEFAULT_RANK_TOL):
    A = as_dense(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.count_nonzero(s > rank_tol * s[0])) if s[0] > 0 else 0


def pinv(A, rank_tol=DEFAULT_RANK_TOL):
    """Moore-Penrose pseudoinverse ``V @ diag(1/sigma) @ U.T``.

    Only singular values above ``rank_tol * sigma_1`` are inverted. The
    pseudoinverse of an all-zero ``(m, n)`` matrix is the ``(n, m)`` zero
    matrix.
    """
    f = svd(A, rank_tol)
    return np.ascontiguousarray((f.Vt.T / f.sigma) @ f.U.T)


def fro_norm(A):
    if is_sparse(A):
        return float(np.sqrt(np.sum(np.square(A.data))))
    return float(np.linalg.norm(A, "fro"))


def spec_norm(A):
    """Largest singular value."""
    if is_sparse(A):
        if min(A.shape) <= 1 or A.nnz == 0:
            # rank <= 1, so the spectral and Frobenius norms coincide
            return fro_norm(A)
        return float(scipy.sparse.linalg.svds(A, k=1, return_singular_vectors=False)[0])
    A = as_dense(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[0])


def matmul(A, B):
    """Exact product of dense and/or sparse operands.

    The sparse operand is never densified: sparse-times-dense runs in
    ``O(nnz * k)``. The result is dense unless both operands are sparse.
    """
    if A.shape[1] != B.shape[0]:
        raise shape_mismatch("matmul", A.shape, B.shape)
    if is_sparse(A) and is_sparse(B):
        return as_sparse(A @ B)
    if is_sparse(A) or is_sparse(B):
        return np.ascontiguousarray(np.asarray(A @ B))
    return A @ B


def residual_norm(A, M, X, N):
    """Frobenius norm of ``A - M @ X @ N``, forming ``(M @ X) @ N`` first."""
    m, n = A.shape
    if M.shape[0] != m or X.shape[0] != M.shape[1] or N.shape[0] != X.shape[1] or N.shape[1] != n:
        raise shape_mismatch("residual_norm (A, M, X, N)", A.shape, M.shape, X.shape, N.shape)
    R = (M @ X) @ N
    if is_sparse(A):
        np.negative(R, out=R)
        coo = A.tocoo()
        # canonical input has no duplicate coordinates, so plain fancy-index add is exact
        R[coo.row, coo.col] += coo.data
    else:
        R = A - R
    return float(np.linalg.norm(R, "fro"))
