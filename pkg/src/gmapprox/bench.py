"""Synthetic instances, trial orchestration and CSV/summary reporting."""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from . import _rng
from .linalg import fro_norm
from .sketch import SketchPlan
from .solver import GmaProblem, error_ratio, solve_exact, solve_lev_score, solve_sps_gauss, solve_symmetric

ALL_METHODS = ("exact", "sparse-gaussian", "leverage")
STAGES = ("sketch_build", "sketch_apply", "pinv", "multiply")

CSV_COLUMNS = (
    "trial",
    "method",
    "s_c",
    "s_r",
    "t",
    "t_prime",
    "error_ratio",
    "exact_residual",
    "sketched_residual",
    "time_sketch_build",
    "time_sketch_apply",
    "time_pinv",
    "time_multiply",
    "time_total",
    "entries_of_A_touched",
    "rank_warning",
)
TIME_COLUMNS = tuple(c for c in CSV_COLUMNS if c.startswith("time_"))


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark run: instance family, methods, trial count and sketch constants.

    With ``density`` set, ``A`` is a sparse random matrix of that density
    and ``noise`` is unused. With ``symmetric`` set, ``n = m``, ``N = M.T``
    and sketched methods run the symmetrized solver.
    """

    m: int = 1000
    n: int = 1000
    c: int = 8
    r: int = 8
    epsilon: float = 0.25
    noise: float = 0.5
    methods: tuple = ("sparse-gaussian", "leverage")
    trials: int = 50
    seed: int = 0
    c_embed: float = 4.0
    c_prod: float = 4.0
    c_log: float = 2.0
    symmetric: bool = False
    density: float | None = None
    threads: int = 1
    csv_path: str | None = None
    summary_path: str | None = None

    def __post_init__(self):
        for name in ("m", "n", "c", "r", "trials", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.noise < 0:
            raise ValueError(f"noise must be >= 0, got {self.noise}")
        if self.c > self.m or self.r > self.n:
            raise ValueError(f"impossible shapes: c={self.c} > m={self.m} or r={self.r} > n={self.n}")
        if self.symmetric and (self.m != self.n or self.c != self.r):
            raise ValueError("symmetric family needs m == n and c == r")
        if self.density is not None and not 0.0 <= self.density <= 1.0:
            raise ValueError(f"density must lie in [0, 1], got {self.density}")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown or not self.methods:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {ALL_METHODS}")
        SketchPlan(self.epsilon, c_embed=self.c_embed, c_prod=self.c_prod, c_log=self.c_log)

    def plan(self, seed):
        return SketchPlan(self.epsilon, c_embed=self.c_embed, c_prod=self.c_prod,
                          c_log=self.c_log, seed=seed)


def generate_synthetic(config, trial_seed):
    """Random instance ``A = M X0 N + noise``.

    ``M``, ``N`` and ``X0`` have i.i.d. standard normal entries and the
    noise is a Gaussian matrix rescaled to ``noise * ||M X0 N||_F``. For
    the symmetric family ``X0`` and the noise are symmetrized and
    ``N = M.T``.
    """
    m, n, c, r = config.m, config.n, config.c, config.r
    rng = _rng.generator(trial_seed, _rng.STREAM_PROBLEM)
    M = rng.standard_normal((m, c))
    if config.symmetric:
        N = M.T.copy()
        X0 = rng.standard_normal((c, c))
        X0 = (X0 + X0.T) / 2
    else:
        N = rng.standard_normal((r, n))
        X0 = rng.standard_normal((c, r))
    if config.density is not None:
        A = scipy.sparse.random_array((m, n), density=config.density, format="csr",
                                      rng=rng, data_sampler=rng.standard_normal)
        if config.symmetric:
            A = (A + A.T) / 2
        return GmaProblem(A, M, N)
    B = (M @ X0) @ N
    if config.symmetric:
        # exact symmetry, not just up to rounding
        B = (B + B.T) / 2
    if config.noise > 0:
        E = rng.standard_normal((m, n))
        if config.symmetric:
            E = (E + E.T) / 2
        B += config.noise * fro_norm(B) / fro_norm(E) * E
    return GmaProblem(B, M, N)


@dataclass
class TrialReport:
    trial: int
    method: str
    dims: dict
    error_ratio: float
    exact_residual: float
    sketched_residual: float
    wall_times: dict = field(default_factory=dict)
    entries_touched: int | None = None
    rank_warning: bool = False

    def row(self):
        d = self.dims or {}
        t = {f"time_{s}": self.wall_times.get(s, 0.0) for s in STAGES}
        t["time_total"] = sum(self.wall_times.values())
        return {
            "trial": self.trial,
            "method": self.method,
            "s_c": d.get("s_c"),
            "s_r": d.get("s_r"),
            "t": d.get("t"),
            "t_prime": d.get("t_prime"),
            "error_ratio": self.error_ratio,
            "exact_residual": self.exact_residual,
            "sketched_residual": self.sketched_residual,
            **t,
            "entries_of_A_touched": self.entries_touched,
            "rank_warning": int(self.rank_warning),
        }


def solve_with(method, problem, plan, symmetric=False):
    if method == "exact":
        return solve_exact(problem)
    if symmetric:
        return solve_symmetric(problem.A, problem.M, plan, method)
    if method == "sparse-gaussian":
        return solve_sps_gauss(problem, plan)
    if method == "leverage":
        return solve_lev_score(problem, plan)
    raise ValueError(f"unknown method {method!r}")


def run_trial(config, trial):
    seed = _rng.derive_seed(config.seed, _rng.STREAM_TRIAL, trial)
    p = generate_synthetic(config, seed)
    exact = solve_exact(p)
    reports = []
    for method in config.methods:
        sol = exact if method == "exact" else solve_with(method, p, config.plan(seed), config.symmetric)
        reports.append(TrialReport(
            trial=trial,
            method=method,
            dims=None if sol.dims is None else sol.dims.as_dict(),
            error_ratio=error_ratio(p, sol, exact.residual),
            exact_residual=exact.residual,
            sketched_residual=sol.residual,
            wall_times=dict(sol.wall_times),
            entries_touched=sol.entries_touched,
            rank_warning=bool(sol.warnings),
        ))
    return reports


def run_bench(config):
    """All trials of ``config``, ordered by (trial, method) regardless of ``threads``."""
    if config.threads == 1:
        per_trial = [run_trial(config, k) for k in range(config.trials)]
    else:
        with ThreadPoolExecutor(config.threads) as pool:
            per_trial = list(pool.map(lambda k: run_trial(config, k), range(config.trials)))
    return [rep for reps in per_trial for rep in reps]


def fmt(v):
    """17 significant digits for floats, so values round-trip exactly."""
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(reports, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        row = rep.row()
        w.writerow([fmt(row[c]) for c in CSV_COLUMNS])


def csv_text(reports):
    buf = io.StringIO()
    write_csv(reports, buf)
    return buf.getvalue()


def summarize(reports, epsilon=None):
    """Per-method median / 95th percentile ratio, mean wall time and entries touched."""
    out = {}
    for method in dict.fromkeys(r.method for r in reports):
        rs = [r for r in reports if r.method == method]
        ratios = np.array([r.error_ratio for r in rs])
        totals = [sum(r.wall_times.values()) for r in rs]
        touched = [r.entries_touched for r in rs if r.entries_touched is not None]
        entry = {
            "trials": len(rs),
            "median_ratio": float(np.median(ratios)),
            "p95_ratio": float(np.percentile(ratios, 95)),
            "max_ratio": float(ratios.max()),
            "mean_wall_time": float(np.mean(totals)),
            "mean_entries_of_A_touched": float(np.mean(touched)) if touched else None,
            "rank_warnings": sum(r.rank_warning for r in rs),
        }
        if epsilon is not None:
            entry["within_1_plus_eps"] = int(np.sum(ratios <= 1 + epsilon))
        out[method] = entry
    return out


