"""Exact and sketched solvers for the generalized matrix approximation problem.

    min_X ||A - M X N||_F,   A: m x n,  M: m x c,  N: r x n

``solve_exact`` computes ``pinv(M) A pinv(N)``. ``solve_sps_gauss`` and
``solve_lev_score`` sketch both sides of the problem (sparse embedding
followed by a Gaussian, or leverage-score row sampling) and solve the small
problem, which stays within ``1 + eps`` of the optimal residual with high
probability using sketch sizes ``O(c/eps)`` and ``O(r/eps)``.
"""

from .linalg import (
    SvdConvergenceError,
    SvdFactors,
    fro_norm,
    matmul,
    pinv,
    residual_norm,
    spec_norm,
    svd,
)
from .sketch import (
    ComposedSketch,
    GaussianSketch,
    IdentitySketch,
    LeverageScoreSketch,
    SketchPlan,
    SparseEmbedding,
    build_composed,
    build_gaussian,
    build_leverage_sketch,
    build_sparse_embedding,
    compute_leverage_scores,
    plan_dims,
)
from .solver import (
    GmaProblem,
    GmaSolution,
    error_ratio,
    solve_exact,
    solve_lev_score,
    solve_sketched,
    solve_sps_gauss,
    solve_symmetric,
)

__version__ = "0.1.0"

__all__ = [
    "SvdConvergenceError", "SvdFactors", "fro_norm", "matmul", "pinv", "residual_norm", "spec_norm", "svd",
    "ComposedSketch", "GaussianSketch", "IdentitySketch", "LeverageScoreSketch", "SketchPlan",
    "SparseEmbedding", "build_composed", "build_gaussian", "build_leverage_sketch",
    "build_sparse_embedding", "compute_leverage_scores", "plan_dims",
    "GmaProblem", "GmaSolution", "error_ratio", "solve_exact", "solve_lev_score", "solve_sketched",
    "solve_sps_gauss", "solve_symmetric",
]
