import json
import math

import numpy as np
import pytest

from gmapprox.bench import BenchConfig
from gmapprox.sketch import SketchPlan, SparseEmbedding, build_sparse_embedding
from gmapprox.verify import (
    PropertyReport,
    check_embedding,
    check_fro_norm,
    check_gma_ratio,
    check_product,
    default_suite,
    make_sketch,
    suite_checks,
)


def injective(m, s, seed, basis):
    # a signed permutation: s = m with every coordinate in its own bucket
    rng = np.random.default_rng(seed)
    return SparseEmbedding(m, s, rng.permutation(m), rng.choice([-1.0, 1.0], m), seed)


def test_report_verdict_and_round_trip():
    r = PropertyReport("x", 10, 9, 0.9, 0.5, 3, params={"s": 4}, stats={"a": 1.5})
    assert r.pass_rate == 0.9 and r.verdict
    d = json.loads(json.dumps(r.to_dict()))
    assert d["verdict"] is True
    assert PropertyReport.from_dict(d) == r
    assert r.line().startswith("[PASS] x: 9/10")
    assert not PropertyReport("x", 10, 8, 0.9, 2.0, 3).verdict


def test_checkers_are_deterministic():
    a = check_embedding("sparse", 300, 3, 0.5, 40, trials=20, seed=5)
    b = check_embedding("sparse", 300, 3, 0.5, 40, trials=20, seed=5)
    assert a == b
    assert check_product("leverage", trials=20, seed=1) == check_product("leverage", trials=20, seed=1)


def test_injective_embedding_always_passes():
    r = check_embedding(injective, 50, 5, 0.1, 50, trials=30)
    assert r.passes == 30 and r.worst_violation <= 1e-12


def test_minimal_sketch_size_has_lower_pass_rate():
    small = check_embedding("gaussian", 500, 8, 0.5, 8, trials=100, seed=2)
    large = check_embedding("gaussian", 500, 8, 0.5, 256, trials=100, seed=2)
    assert small.pass_rate < large.pass_rate
    assert small.pass_rate < 0.5
    assert small.params["s"] == 8


def test_product_zero_b_always_passes():
    r = check_product("sparse", trials=20, sampler=lambda rng: (rng.standard_normal((100, 3)), np.zeros((100, 2))))
    assert r.passes == 20 and r.worst_violation == 0.0


def test_product_sparse_at_sixteen_over_eps_squared():
    eps = 0.25
    r = check_product("sparse", epsilon=eps, s=math.ceil(16 / eps**2), trials=200)
    assert r.pass_rate >= 0.9, r.line()


def test_fro_norm_zero_matrix_passes():
    r = check_fro_norm("gaussian", trials=10, sampler=lambda rng: np.zeros((50, 4)))
    assert r.passes == 10


@pytest.mark.parametrize("family", ["sparse", "gaussian"])
def test_fro_norm_families(family):
    r = check_fro_norm(family, epsilon=0.25, trials=200)
    assert r.pass_rate >= 0.9, r.line()


def test_gma_identity_control_always_passes():
    r = check_gma_ratio(BenchConfig(m=60, n=50, c=3, r=3), "identity", SketchPlan(0.25), trials=10)
    assert r.passes == 10
    assert r.stats["max_ratio"] == pytest.approx(1.0, abs=1e-10)


def test_make_sketch_rejections():
    with pytest.raises(ValueError, match="leverage family needs"):
        make_sketch("leverage", 10, 4, 0)
    with pytest.raises(ValueError, match="unknown sketch family"):
        make_sketch("srht", 10, 4, 0)
    np.testing.assert_array_equal(make_sketch("sparse", 10, 4, 3).buckets, build_sparse_embedding(10, 4, 3).buckets)


def test_suite_names_match_reports():
    names = [name for name, _ in suite_checks()]
    assert len(names) == len(set(names)) == 13
    reports = default_suite(trials=5, gma_trials=2, only=["fro_norm"])
    assert [r.name for r in reports] == ["fro_norm[sparse]", "fro_norm[gaussian]"]
