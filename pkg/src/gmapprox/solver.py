"""Exact and sketched solvers for ``min_X ||A - M X N||_F``.

The exact minimizer is ``X* = pinv(M) A pinv(N)``. The sketched solvers
compress the row space of ``A`` and ``M`` with a left sketch ``S_M`` and the
column space of ``A`` and ``N`` with a right sketch ``S_N`` and return

    X_hat = pinv(S_M M) (S_M A S_N^T) pinv(N S_N^T),

which is within a factor ``1 + eps`` of the optimal residual when both
sketches are subspace embeddings for their factor and approximate matrix
products at accuracy ``sqrt(eps / c)`` (resp. ``sqrt(eps / r)``).
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .linalg import (
    DEFAULT_RANK_TOL,
    as_dense,
    as_matrix,
    fro_norm,
    is_sparse,
    matmul,
    nnz,
    pinv,
    rank,
    residual_norm,
    shape_mismatch,
    sparse_lookup,
)
from .sketch import (
    LeverageScoreSketch,
    TouchCounter,
    build_composed,
    build_leverage_sketch,
    compute_leverage_scores,
    plan_dims,
)

EXACT_FLOOR = 1e-12
SKETCHED_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class GmaProblem:
    """``A`` (m x n, dense or sparse), ``M`` (m x c) and ``N`` (r x n)."""

    A: object
    M: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        M = as_dense(self.M, "M")
        N = as_dense(self.N, "N")
        m, n = A.shape
        if M.shape[0] != m or N.shape[1] != n:
            raise shape_mismatch("problem (A, M, N)", A.shape, M.shape, N.shape)
        if M.shape[1] > m or N.shape[0] > n:
            raise ValueError(f"need c <= m and r <= n, got c={M.shape[1]}, m={m}, r={N.shape[0]}, n={n}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)

    @property
    def shape(self):
        """``(m, n, c, r)``"""
        return (*self.A.shape, self.M.shape[1], self.N.shape[0])


@dataclass
class GmaSolution:
    X: np.ndarray
    residual: float
    method: str
    dims: object = None
    wall_times: dict = field(default_factory=dict)
    seed: int | None = None
    entries_touched: int | None = None
    warnings: list = field(default_factory=list)

    def record(self):
        """Flat, JSON-serializable summary (``X`` excluded)."""
        return {
            "method": self.method,
            "residual": self.residual,
            "shape_X": list(self.X.shape),
            "dims": None if self.dims is None else self.dims.as_dict(),
            "wall_times": dict(self.wall_times),
            "seed": self.seed,
            "entries_of_A_touched": self.entries_touched,
            "warnings": list(self.warnings),
        }


class _Stopwatch:
    def __init__(self):
        self.times = {}

    def __call__(self, stage):
        return _Lap(self.times, stage)


class _Lap:
    def __init__(self, times, stage):
        self.times, self.stage = times, stage

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.times[self.stage] = self.times.get(self.stage, 0.0) + time.perf_counter() - self.t0


def _triple(P, B, Q):
    """``P @ B @ Q`` in the association order with fewer scalar multiplications."""
    a, b = P.shape
    _, d = Q.shape
    k = B.shape[1]
    if a * b * k + a * k * d <= b * k * d + a * b * d:
        return matmul(matmul(P, B), Q)
    return matmul(P, matmul(B, Q))


def solve_exact(p, rank_tol=DEFAULT_RANK_TOL):
    """Exact minimizer ``X* = pinv(M) @ A @ pinv(N)``, the reference oracle."""
    sw = _Stopwatch()
    with sw("pinv"):
        Mp = pinv(p.M, rank_tol)
        Np = pinv(p.N, rank_tol)
    with sw("multiply"):
        m, n, c, r = p.shape
        work = nnz(p.A) if is_sparse(p.A) else m * n
        # (M+ A) N+ costs c*work + c*n*r; M+ (A N+) costs r*work + m*r*c
        if c * work + c * n * r <= r * work + m * r * c:
            X = matmul(matmul(Mp, p.A), Np)
        else:
            X = matmul(Mp, matmul(p.A, Np))
    with sw("residual"):
        res = residual_norm(p.A, p.M, X, p.N)
    return GmaSolution(X=X, residual=res, method="exact", wall_times=sw.times)


def sampled_core(A, S_M, S_N, counter=None):
    """``S_M @ A @ S_N.T`` for two row-sampling sketches.

    Reads exactly ``s_c * s_r`` entries of ``A`` (with repetition when an
    index is sampled more than once), by random access.
    """
    rows, cols = S_M.indices, S_N.indices
    if is_sparse(A):
        rr = np.repeat(rows, cols.size)
        cc = np.tile(cols, rows.size)
        core = sparse_lookup(A, rr, cc).reshape(rows.size, cols.size)
    else:
        core = A[np.ix_(rows, cols)]
    if counter is not None:
        counter.add(rows.size * cols.size)
    return core * S_M.scales[:, None] * S_N.scales[None, :]


def _sketched(p, S_M, S_N, method, rank_tol, sw, seed=None, dims=None):
    if S_M.input_dim != p.A.shape[0] or S_N.input_dim != p.A.shape[1]:
        raise shape_mismatch("sketches (S_M, S_N) for A", S_M.shape, S_N.shape, p.A.shape)
    counter = TouchCounter()
    with sw("sketch_apply"):
        SM_M = S_M.apply_left(p.M)
        N_SN = S_N.apply_right(p.N)
        if isinstance(S_M, LeverageScoreSketch) and isinstance(S_N, LeverageScoreSketch):
            core = sampled_core(p.A, S_M, S_N, counter)
        else:
            core = S_N.apply_right(S_M.apply_left(p.A, counter))
    warnings = []
    with sw("pinv"):
        P = pinv(SM_M, rank_tol)
        Q = pinv(N_SN, rank_tol)
        if rank(SM_M, rank_tol) < rank(p.M, rank_tol):
            warnings.append("S_M M is rank deficient; the (1+eps) guarantee does not apply")
        if rank(N_SN, rank_tol) < rank(p.N, rank_tol):
            warnings.append("N S_N^T is rank deficient; the (1+eps) guarantee does not apply")
    with sw("multiply"):
        X = _triple(P, core, Q)
    with sw("residual"):
        res = residual_norm(p.A, p.M, X, p.N)
    return GmaSolution(X=X, residual=res, method=method, dims=dims, wall_times=sw.times,
                       seed=seed, entries_touched=counter.entries, warnings=warnings)


def solve_sketched(p, S_M, S_N, rank_tol=DEFAULT_RANK_TOL, method="sketched"):
    """Sketched solution for user-supplied left and right sketches.

    ``S_M`` must act on ``m``-vectors and ``S_N`` on ``n``-vectors; any
    object with ``input_dim``, ``apply_left`` and ``apply_right`` works. A
    rank-deficient ``S_M M`` or ``N S_N^T`` is recorded in
    ``solution.warnings`` and the computation proceeds with pseudoinverses.
    """
    return _sketched(p, S_M, S_N, method, rank_tol, _Stopwatch())


def solve_sps_gauss(p, plan, rank_tol=DEFAULT_RANK_TOL):
    """Sketched solve with ``S = G @ Pi`` (Gaussian after sparse embedding) on both sides."""
    m, n, c, r = p.shape
    dims = plan_dims(plan, c, r, "sparse-gaussian")
    sw = _Stopwatch()
    with sw("sketch_build"):
        S_M = build_composed(m, dims.t, dims.s_c, _rng.derive_seed(plan.seed, _rng.STREAM_LEFT))
        S_N = build_composed(n, dims.t_prime, dims.s_r, _rng.derive_seed(plan.seed, _rng.STREAM_RIGHT))
    return _sketched(p, S_M, S_N, "sparse-gaussian", rank_tol, sw, plan.seed, dims)


def solve_lev_score(p, plan, rank_tol=DEFAULT_RANK_TOL):
    """Sketched solve with leverage-score sampling of ``M`` and of ``N.T``.

    Only ``s_c * s_r`` entries of ``A`` are read; the count is returned in
    ``solution.entries_touched``.
    """
    m, n, c, r = p.shape
    dims = plan_dims(plan, c, r, "leverage")
    sw = _Stopwatch()
    with sw("sketch_build"):
        S_M = build_leverage_sketch(compute_leverage_scores(p.M, rank_tol), dims.s_c,
                                    _rng.derive_seed(plan.seed, _rng.STREAM_LEFT))
        S_N = build_leverage_sketch(compute_leverage_scores(p.N.T, rank_tol), dims.s_r,
                                    _rng.derive_seed(plan.seed, _rng.STREAM_RIGHT))
    return _sketched(p, S_M, S_N, "leverage", rank_tol, sw, plan.seed, dims)


def solve_symmetric(A, M, plan, method="sparse-gaussian", rank_tol=DEFAULT_RANK_TOL):
    """Symmetric problem ``min_X ||A - M X M^T||_F`` for symmetric ``A``.

    Two independent sketches for ``M`` are used on the left and right, and
    the returned solution is the symmetrized ``(X_hat + X_hat^T) / 2``.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"symmetric solve needs square A, got {A.shape[0]}x{A.shape[1]}")
    asym = abs(A - A.T).max()
    if asym > 1e-10:
        raise ValueError(f"A is not symmetric: max |A - A^T| = {asym:.3e} > 1e-10")
    M = as_dense(M, "M")
    p = GmaProblem(A, M, M.T)
    m, _, c, _ = p.shape
    dims = plan_dims(plan, c, c, method)
    sw = _Stopwatch()
    left, right = (_rng.derive_seed(plan.seed, s) for s in (_rng.STREAM_LEFT, _rng.STREAM_RIGHT))
    with sw("sketch_build"):
        if method == "sparse-gaussian":
            S1 = build_composed(m, dims.t, dims.s_c, left)
            S2 = build_composed(m, dims.t, dims.s_c, right)
        else:
            scores = compute_leverage_scores(M, rank_tol)
            S1 = build_leverage_sketch(scores, dims.s_c, left)
            S2 = build_leverage_sketch(scores, dims.s_c, right)
    sol = _sketched(p, S1, S2, "symmetric-" + method, rank_tol, sw, plan.seed, dims)
    with sw("multiply"):
        X = (sol.X + sol.X.T) / 2
    with sw("residual"):
        sol.residual = residual_norm(p.A, p.M, X, p.N)
    sol.X = X
    return sol


def error_ratio(p, sol, exact_residual=None):
    """``sol.residual / optimal residual``.

    When the optimal residual is below ``1e-12 ||A||_F`` the ratio is noise;
    it is reported as 1 if ``sol.residual <= 1e-10 ||A||_F`` and ``inf``
    otherwise.
    """
    if exact_residual is None:
        exact_residual = solve_exact(p).residual
    scale = fro_norm(p.A)
    if exact_residual <= EXACT_FLOOR * scale:
        return 1.0 if sol.residual <= SKETCHED_FLOOR * scale else float("inf")
    return sol.residual / exact_residual
