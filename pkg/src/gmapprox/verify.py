"""Monte Carlo certificates for sketch and solver properties.

Each ``check_*`` function runs seeded, independent trials against public
operations only and returns a :class:`PropertyReport`. A property is
certified when the fraction of passing trials reaches ``threshold``. The
thresholds (0.9 and 0.95) are conventions standing in for "with high
probability"; the underlying results carry no explicit constants.

``worst_violation`` is the largest observed error divided by the allowed
error, so a trial passes iff its value is ``<= 1``.
"""

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _rng
from .bench import BenchConfig, generate_synthetic, solve_with
from .linalg import fro_norm
from .sketch import (
    IdentitySketch,
    SketchPlan,
    build_composed,
    build_gaussian,
    build_leverage_sketch,
    build_sparse_embedding,
    compute_leverage_scores,
)
from .solver import error_ratio, solve_sketched

FAMILIES = ("sparse", "gaussian", "leverage", "composed")


@dataclass
class PropertyReport:
    name: str
    trials: int
    passes: int
    threshold: float
    worst_violation: float
    seed: int
    params: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def pass_rate(self):
        return self.passes / self.trials

    @property
    def verdict(self):
        return self.pass_rate >= self.threshold

    def to_dict(self):
        d = asdict(self)
        d["pass_rate"] = self.pass_rate
        d["verdict"] = self.verdict
        return d

    @classmethod
    def from_dict(cls, d):
        keys = {"name", "trials", "passes", "threshold", "worst_violation", "seed", "params", "stats"}
        return cls(**{k: v for k, v in d.items() if k in keys})

    def line(self):
        status = "PASS" if self.verdict else "FAIL"
        return (f"[{status}] {self.name}: {self.passes}/{self.trials} "
                f"(need {self.threshold:.2f}), worst {self.worst_violation:.3g}")


def make_sketch(family, m, s, seed, basis=None, t=None):
    """Build an ``s x m`` sketch of the named family.

    ``basis`` is the matrix whose leverage scores drive the ``leverage``
    family; ``t`` is the inner dimension of the ``composed`` family
    (default ``4 s``). ``family`` may also be a callable
    ``(m, s, seed, basis) -> sketch``.
    """
    if callable(family):
        return family(m, s, seed, basis)
    if family == "sparse":
        return build_sparse_embedding(m, s, seed)
    if family == "gaussian":
        return build_gaussian(m, s, seed)
    if family == "leverage":
        if basis is None:
            raise ValueError("leverage family needs the matrix whose scores are sampled")
        return build_leverage_sketch(compute_leverage_scores(basis), s, seed)
    if family == "composed":
        return build_composed(m, t or 4 * s, s, seed)
    raise ValueError(f"unknown sketch family {family!r}; expected one of {FAMILIES}")


def _family_name(family):
    return family if isinstance(family, str) else getattr(family, "__name__", "custom")


def _orthonormal(rng, m, d):
    return np.linalg.qr(rng.standard_normal((m, d)))[0]


def _trial_rng(seed, k):
    return _rng.generator(seed, _rng.STREAM_TRIAL, k)


def _sketch_seed(seed, k):
    return _rng.derive_seed(seed, _rng.STREAM_TRIAL, k, 1)


def check_embedding(family, m, d, epsilon, s, trials=200, seed=0, threshold=0.95, t=None):
    """Subspace embedding: every singular value of ``S U`` in ``[sqrt(1-eps), sqrt(1+eps)]``.

    ``U`` is a fresh random ``m x d`` orthonormal basis in every trial. For
    the ``composed`` family ``epsilon`` is the per-stage distortion and the
    interval widens to ``(1 +- (2 eps + eps^2))``, the composition of two
    ``eps``-embeddings.
    """
    allowed = 2 * epsilon + epsilon**2 if family == "composed" else epsilon
    passes, worst = 0, 0.0
    for k in range(trials):
        U = _orthonormal(_trial_rng(seed, k), m, d)
        S = make_sketch(family, m, s, _sketch_seed(seed, k), basis=U, t=t)
        sv = np.linalg.svd(S.apply_left(U), compute_uv=False)
        if sv.size < d:
            sv = np.concatenate([sv, np.zeros(d - sv.size)])
        v = float(np.max(np.abs(sv**2 - 1))) / allowed
        worst = max(worst, v)
        passes += v <= 1
    return PropertyReport(
        name=f"embedding[{_family_name(family)}]", trials=trials, passes=passes,
        threshold=threshold, worst_violation=worst, seed=seed,
        params={"m": m, "d": d, "epsilon": epsilon, "s": s, "t": t, "allowed_distortion": allowed},
    )


def check_product(family, shapes=((500, 6), (500, 4)), epsilon=0.25, s=None, trials=200, seed=0,
                  threshold=0.9, t=None, bound_factor=None, sampler=None):
    """Approximate matrix product: ``||A^T S^T S B - A^T B||_F <= k eps ||A||_F ||B||_F``.

    ``k`` (``bound_factor``) is 1, or 5 for the ``composed`` family. The
    ``leverage`` family samples from the scores of ``A``; the classical
    guarantee is stated for ``A`` with orthonormal columns, while this check
    uses general Gaussian ``A`` unless ``sampler`` supplies the pair.
    ``sampler(rng) -> (A, B)`` overrides the random Gaussian pair.
    """
    if s is None:
        s = math.ceil(4 / epsilon**2)
    if bound_factor is None:
        bound_factor = 5.0 if family == "composed" else 1.0
    (m, p), (_, q) = shapes
    passes, worst = 0, 0.0
    for k in range(trials):
        rng = _trial_rng(seed, k)
        if sampler is None:
            A, B = rng.standard_normal((m, p)), rng.standard_normal((m, q))
        else:
            A, B = sampler(rng)
        S = make_sketch(family, A.shape[0], s, _sketch_seed(seed, k), basis=A, t=t)
        err = fro_norm(S.apply_left(A).T @ S.apply_left(B) - A.T @ B)
        limit = bound_factor * epsilon * fro_norm(A) * fro_norm(B)
        v = err / limit if limit > 0 else (0.0 if err == 0 else math.inf)
        worst = max(worst, v)
        passes += v <= 1
    return PropertyReport(
        name=f"product[{_family_name(family)}]", trials=trials, passes=passes,
        threshold=threshold, worst_violation=worst, seed=seed,
        params={"shapes": [list(shapes[0]), list(shapes[1])], "epsilon": epsilon, "s": s, "t": t,
                "bound_factor": bound_factor},
    )


def check_fro_norm(family, shape=(500, 20), epsilon=0.25, s=None, trials=200, seed=0,
                   threshold=0.9, t=None, sampler=None):
    """Frobenius norm preservation: ``||S A||_F^2 = (1 +- eps) ||A||_F^2``."""
    if s is None:
        s = math.ceil(8 / epsilon**2)
    passes, worst = 0, 0.0
    for k in range(trials):
        rng = _trial_rng(seed, k)
        A = rng.standard_normal(shape) if sampler is None else sampler(rng)
        S = make_sketch(family, A.shape[0], s, _sketch_seed(seed, k), basis=A, t=t)
        num, den = fro_norm(S.apply_left(A)) ** 2, fro_norm(A) ** 2
        v = 0.0 if den == 0 and num == 0 else abs(num / den - 1) / epsilon
        worst = max(worst, v)
        passes += v <= 1
    return PropertyReport(
        name=f"fro_norm[{_family_name(family)}]", trials=trials, passes=passes,
        threshold=threshold, worst_violation=worst, seed=seed,
        params={"shape": list(shape), "epsilon": epsilon, "s": s, "t": t},
    )


def check_gma_ratio(config, method, plan, trials=50, seed=0, threshold=0.9):
    """``error_ratio <= 1 + eps`` against the exact solver on random instances.

    ``config`` describes the instance family (see
    :func:`gmapprox.bench.generate_synthetic`); ``method`` is
    ``"sparse-gaussian"``, ``"leverage"`` or the ``"identity"`` control.
    """
    eps = plan.epsilon
    ratios = []
    for k in range(trials):
        p = generate_synthetic(config, _rng.derive_seed(seed, _rng.STREAM_TRIAL, k))
        if method == "identity":
            m, n = p.A.shape
            sol = solve_sketched(p, IdentitySketch(m), IdentitySketch(n))
        else:
            sol = solve_with(method, p, replace(plan, seed=_sketch_seed(plan.seed, k)), config.symmetric)
        ratios.append(error_ratio(p, sol))
    ratios = np.array(ratios)
    passes = int(np.sum(ratios <= 1 + eps))
    return PropertyReport(
        name=f"gma_ratio[{'symmetric-' if config.symmetric else ''}{method}]", trials=trials,
        passes=passes, threshold=threshold, worst_violation=float(np.max(ratios - 1) / eps), seed=seed,
        params={"m": config.m, "n": config.n, "c": config.c, "r": config.r, "noise": config.noise,
                "epsilon": eps, "c_embed": plan.c_embed, "c_prod": plan.c_prod, "c_log": plan.c_log},
        stats={"median_ratio": float(np.median(ratios)), "max_ratio": float(ratios.max())},
    )


def suite_checks(seed=0, trials=200, gma_trials=50):
    """Named, not-yet-run checks of the certification suite, in report order.

    Embedding checks use ``d = 8``, ``eps = 1/2``, ``m = 2000`` with sketch
    sizes ``4 d^2/eps^2`` (sparse), ``4 d/eps^2`` (Gaussian) and
    ``4 d ln(d+1)/eps^2`` (leverage); the composed check uses per-stage
    ``eps = 0.4`` on ``m = 4000``. Product checks use ``eps = 1/4`` and
    ``s = 4/eps^2``; Frobenius checks ``s = 8/eps^2``. Solver checks run the
    ``m = n = 1000``, ``c = r = 8``, ``eta = 0.5`` family at ``eps = 1/4``.
    """
    d, eps, m = 8, 0.5, 2000
    ce = 0.4
    pe = 0.25
    plan = SketchPlan(0.25, seed=seed)
    family = BenchConfig(m=1000, n=1000, c=8, r=8, noise=0.5)
    checks = [
        ("embedding[sparse]", lambda: check_embedding("sparse", m, d, eps, math.ceil(4 * d * d / eps**2), trials, seed)),
        ("embedding[gaussian]", lambda: check_embedding("gaussian", m, d, eps, math.ceil(4 * d / eps**2), trials, seed)),
        ("embedding[leverage]", lambda: check_embedding(
            "leverage", m, d, eps, math.ceil(4 * d * math.log(d + 1) / eps**2), trials, seed)),
        ("embedding[composed]", lambda: check_embedding(
            "composed", 4000, d, ce, math.ceil(4 * d / ce**2), trials, seed, t=math.ceil(4 * d * d / ce**2))),
    ]
    for fam in FAMILIES:
        checks.append((f"product[{fam}]", lambda fam=fam: check_product(fam, epsilon=pe, trials=trials, seed=seed)))
    for fam in ("sparse", "gaussian"):
        checks.append((f"fro_norm[{fam}]", lambda fam=fam: check_fro_norm(fam, epsilon=pe, trials=trials, seed=seed)))
    for method in ("sparse-gaussian", "leverage"):
        checks.append((f"gma_ratio[{method}]",
                       lambda method=method: check_gma_ratio(family, method, plan, gma_trials, seed)))
    checks.append(("gma_ratio[symmetric-sparse-gaussian]",
                   lambda: check_gma_ratio(replace(family, symmetric=True), "sparse-gaussian", plan, gma_trials, seed)))
    return checks


def default_suite(seed=0, trials=200, gma_trials=50, only=None):
    """Run the certification suite, optionally only checks whose name contains a key in ``only``."""
    return [run() for name, run in suite_checks(seed, trials, gma_trials)
            if not only or any(key in name for key in only)]
