"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line (visible even without
``-s``) before asserting.
"""

import math
import statistics
import time

import numpy as np
import pytest
import scipy.sparse

from gmapprox import cli
from gmapprox.bench import BenchConfig, generate_synthetic
from gmapprox.linalg import as_sparse, fro_norm, residual_norm
from gmapprox.mmio import MatrixMarketError, read_matrix, write_matrix
from gmapprox.sketch import (
    IdentitySketch,
    SketchPlan,
    apply_sparse_embedding_left,
    build_sparse_embedding,
    plan_dims,
)
from gmapprox.solver import (
    GmaProblem,
    error_ratio,
    solve_exact,
    solve_lev_score,
    solve_sketched,
    solve_sps_gauss,
    solve_symmetric,
)
from gmapprox.verify import check_embedding, check_fro_norm, check_product

FAMILY = BenchConfig(m=1000, n=1000, c=8, r=8, noise=0.5, epsilon=0.25)
PLAN = dict(c_embed=4, c_prod=4, c_log=2)
TRIALS = 50


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        return ok
    return emit


def ratios_for(solve, config=FAMILY, trials=TRIALS):
    out = []
    for k in range(trials):
        p = generate_synthetic(config, 1000 + k)
        sol = solve(p, SketchPlan(0.25, seed=k, **PLAN))
        out.append((p, sol, error_ratio(p, sol)))
    return out


def test_criterion_1_sparse_gaussian(report):
    t0 = time.perf_counter()
    runs = ratios_for(solve_sps_gauss)
    elapsed = time.perf_counter() - t0
    ratios = [r for _, _, r in runs]
    within = sum(r <= 1.25 for r in ratios)
    med = statistics.median(ratios)
    ok = within >= 45 and med <= 1.10 and elapsed <= 60
    report(1, ok, f"sparse-gaussian ratio<=1.25 in {within}/50, median {med:.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_leverage(report):
    t0 = time.perf_counter()
    runs = ratios_for(solve_lev_score)
    elapsed = time.perf_counter() - t0
    ratios = [r for _, _, r in runs]
    within = sum(r <= 1.25 for r in ratios)
    med = statistics.median(ratios)
    dims = plan_dims(SketchPlan(0.25, **PLAN), 8, 8, "leverage")
    counted = all(sol.entries_touched == dims.s_c * dims.s_r for _, sol, _ in runs)
    ok = within >= 45 and med <= 1.10 and elapsed <= 60 and counted
    report(2, ok, f"leverage ratio<=1.25 in {within}/50, median {med:.4f}, {elapsed:.1f}s, "
                  f"touched == s_c*s_r={dims.s_c * dims.s_r} in every trial: {counted}")
    assert ok


def test_criterion_3_symmetric(report):
    cfg = BenchConfig(m=1000, n=1000, c=8, r=8, noise=0.5, symmetric=True)
    within, symmetric = 0, True
    for k in range(TRIALS):
        p = generate_synthetic(cfg, 2000 + k)
        sol = solve_symmetric(p.A, p.M, SketchPlan(0.25, seed=k, **PLAN), "sparse-gaussian")
        symmetric &= bool(np.array_equal(sol.X, sol.X.T))
        within += error_ratio(p, sol) <= 1.25
    ok = symmetric and within >= 45
    report(3, ok, f"symmetric X exactly symmetric: {symmetric}, ratio<=1.25 in {within}/50")
    assert ok


def test_criterion_4_exact_optimality(report):
    rng = np.random.default_rng(4)
    worst_pyth = worst_normal = 0.0
    beaten = 0
    for _ in range(100):
        m, n = int(rng.integers(1, 51)), int(rng.integers(1, 41))
        c, r = int(rng.integers(1, min(6, m) + 1)), int(rng.integers(1, min(6, n) + 1))
        p = GmaProblem(rng.standard_normal((m, n)), rng.standard_normal((m, c)), rng.standard_normal((r, n)))
        sol = solve_exact(p)
        W = rng.standard_normal((c, r))
        lhs = residual_norm(p.A, p.M, sol.X + W, p.N) ** 2
        rhs = sol.residual**2 + fro_norm(p.M @ W @ p.N) ** 2
        worst_pyth = max(worst_pyth, abs(lhs - rhs) / lhs)
        R = p.A - p.M @ sol.X @ p.N
        worst_normal = max(worst_normal, fro_norm(p.M.T @ R @ p.N.T)
                           / (fro_norm(p.M) * fro_norm(p.A) * fro_norm(p.N)))
        for _ in range(2):
            beaten += residual_norm(p.A, p.M, sol.X + 1e-2 * rng.standard_normal((c, r)), p.N) < sol.residual
    ok = worst_pyth <= 1e-8 and worst_normal <= 1e-8 and beaten == 0
    report(4, ok, f"Pythagorean rel err {worst_pyth:.2e}, normal equations {worst_normal:.2e}, "
                  f"200 perturbations beating X*: {beaten}")
    assert ok


EMBED = {
    "sparse": lambda d, eps: math.ceil(4 * d * d / eps**2),
    "gaussian": lambda d, eps: math.ceil(4 * d / eps**2),
    "leverage": lambda d, eps: math.ceil(4 * d * math.log(d + 1) / eps**2),
}


@pytest.mark.parametrize("family", sorted(EMBED))
def test_criterion_5_subspace_embedding(report, family):
    d, eps = 8, 0.5
    r = check_embedding(family, 2000, d, eps, EMBED[family](d, eps), trials=200, seed=0)
    report(5, r.verdict, f"{r.line()} (s={r.params['s']})")
    assert r.verdict, r.line()


@pytest.mark.parametrize("family", ["sparse", "gaussian", "leverage", "composed"])
def test_criterion_6_product(report, family):
    r = check_product(family, epsilon=0.25, trials=200, seed=0)
    report(6, r.verdict, f"{r.line()} (bound {r.params['bound_factor']:g} eps)")
    assert r.verdict, r.line()


@pytest.mark.parametrize("family", ["sparse", "gaussian"])
def test_criterion_6_fro_norm(report, family):
    r = check_fro_norm(family, epsilon=0.25, trials=200, seed=0)
    report(6, r.verdict, r.line())
    assert r.verdict, r.line()


def test_criterion_6_composed_embedding(report):
    d, eps = 8, 0.4
    r = check_embedding("composed", 4000, d, eps, math.ceil(4 * d / eps**2), trials=200, seed=0,
                        t=math.ceil(4 * d * d / eps**2))
    report(6, r.verdict, f"{r.line()} (2eps+eps^2 interval)")
    assert r.verdict, r.line()


def random_sparse(rng, m, k, nnz):
    flat = rng.choice(m * k, nnz, replace=False)
    return as_sparse(scipy.sparse.csr_array((rng.standard_normal(nnz), (flat // k, flat % k)), shape=(m, k)))


def median_time(S, A, runs=5):
    apply_sparse_embedding_left(S, A)
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        apply_sparse_embedding_left(S, A)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def test_criterion_7_nnz_scaling(report):
    rng = np.random.default_rng(7)
    m, k = 5000, 2000
    S = build_sparse_embedding(m, 20, 0)
    small, large = random_sparse(rng, m, k, 10**5), random_sparse(rng, m, k, 10**6)
    ratio = median_time(S, large) / median_time(S, small)
    ok = 5 <= ratio <= 20
    report(7, ok, f"time(nnz=1e6)/time(nnz=1e5) = {ratio:.2f}")
    assert ok


def test_criterion_8_identity_sketch(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        m, n = int(rng.integers(10, 60)), int(rng.integers(10, 60))
        c, r = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        p = GmaProblem(rng.standard_normal((m, n)), rng.standard_normal((m, c)), rng.standard_normal((r, n)))
        X = solve_exact(p).X
        Y = solve_sketched(p, IdentitySketch(m), IdentitySketch(n)).X
        worst = max(worst, fro_norm(X - Y) / fro_norm(X))
    ok = worst <= 1e-10
    report(8, ok, f"identity sketches vs exact, worst relative difference {worst:.2e}")
    assert ok


MALFORMED = {
    "field": "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1.0 0.0\n",
    "banner": "%%MatrixMarkt matrix coordinate real general\n2 2 0\n",
    "symmetry": "%%MatrixMarket matrix array real skew-symmetric\n2 2\n",
    "size": "%%MatrixMarket matrix coordinate real general\n2 2\n",
    "bounds": "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 0 1.0\n",
    "entry": "%%MatrixMarket matrix array real general\n1 2\n1.0\n2,5\n",
    "duplicate": "%%MatrixMarket matrix coordinate real general\n2 2 2\n2 1 1.0\n2 1 1.0\n",
    "count": "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n",
}


def test_criterion_9_io(report, tmp_path, capsys):
    rng = np.random.default_rng(9)
    exact = 0
    for k in range(50):
        m, n = (int(v) for v in rng.integers(1, 30, 2))
        dense = rng.standard_normal((m, n)) * 10.0 ** rng.integers(-300, 300, (m, n))
        write_matrix(tmp_path / "d.mtx", dense)
        sparse = as_sparse(scipy.sparse.random_array((m, n), density=0.2, rng=rng, format="csr"))
        write_matrix(tmp_path / "s.mtx", sparse)
        d, s = read_matrix(tmp_path / "d.mtx"), read_matrix(tmp_path / "s.mtx")
        exact += d.tobytes() == dense.tobytes() and (s != sparse).nnz == 0 and s.shape == sparse.shape
    kinds = {}
    M = tmp_path / "M.mtx"
    N = tmp_path / "N.mtx"
    write_matrix(M, np.ones((2, 1)))
    write_matrix(N, np.ones((1, 2)))
    for kind, text in MALFORMED.items():
        path = tmp_path / f"{kind}.mtx"
        path.write_text(text)
        try:
            read_matrix(path)
            got = None
        except MatrixMarketError as e:
            got = e.kind
        code = cli.main(["solve", "--a", str(path), "--m", str(M), "--n", str(N)])
        err = capsys.readouterr().err
        kinds[kind] = got == kind and code == 2 and f"{kind} error" in err
    ok = exact == 50 and all(kinds.values()) and len(kinds) >= 6
    report(9, ok, f"round trips exact {exact}/50, malformed cases with designated error and exit 2: "
                  f"{sum(kinds.values())}/{len(kinds)}")
    assert ok, kinds
