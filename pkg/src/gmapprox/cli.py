"""Command-line front end: ``gmapprox solve | bench | verify``.

Exit codes: 0 success, 1 a verify property failed, 2 input or configuration
error, 3 numerical failure.
"""

import argparse
import json
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import bench, mmio, verify
from .linalg import fro_norm
from .sketch import SketchPlan
from .solver import GmaProblem, solve_exact, solve_lev_score, solve_sps_gauss, solve_symmetric

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(Exception):
    pass


def _default_seed():
    raw = os.environ.get("GMA_SEED")
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise InputError(f"GMA_SEED={raw!r} is not an integer") from None


def _seed(args):
    return args.seed if args.seed is not None else _default_seed()


def _read(path, what, dense=False):
    if not os.path.isfile(path):
        raise InputError(f"{what}: no such file: {path}")
    X = mmio.read_matrix(path)
    return X.toarray() if dense and hasattr(X, "toarray") else X


def _open_out(path):
    if path is None or path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _emit(record, fh):
    fh.write(json.dumps(record, sort_keys=True, default=_json_default) + "\n")


def _add_constants(p):
    p.add_argument("--c-embed", type=float, default=4.0, help="constant for t (default 4)")
    p.add_argument("--c-prod", type=float, default=4.0, help="constant for s_c, s_r (default 4)")
    p.add_argument("--c-log", type=float, default=2.0, help="log-term constant, leverage (default 2)")


def cmd_solve(args):
    A = _read(args.a, "--a")
    M = _read(args.m, "--m", dense=True)
    seed = _seed(args)
    plan = SketchPlan(args.epsilon, c_embed=args.c_embed, c_prod=args.c_prod, c_log=args.c_log, seed=seed)
    if args.method == "symmetric":
        if args.n is not None:
            raise InputError("--n is implied (M^T) for --method symmetric")
        sol = solve_symmetric(A, M, plan, args.sym_method)
        p = GmaProblem(A, M, M.T)
    else:
        if args.n is None:
            raise InputError("--n is required unless --method symmetric")
        N = _read(args.n, "--n", dense=True)
        p = GmaProblem(A, M, N)
        solver = {"exact": solve_exact, "sparse-gaussian": solve_sps_gauss, "leverage": solve_lev_score}
        sol = solver[args.method](p) if args.method == "exact" else solver[args.method](p, plan)
    if args.out:
        mmio.write_matrix(args.out, sol.X)
    rec = sol.record()
    rec.update(command="solve", norm_A=fro_norm(p.A), shape=list(p.shape), epsilon=args.epsilon)
    with _open_out(args.report) as fh:
        _emit(rec, fh)
    return EXIT_OK


def cmd_bench(args):
    cfg = bench.BenchConfig(
        m=args.m, n=args.n if args.n is not None else args.m, c=args.c,
        r=args.r if args.r is not None else args.c, epsilon=args.epsilon, noise=args.noise,
        methods=tuple(s.strip() for s in args.methods.split(",") if s.strip()),
        trials=args.trials, seed=_seed(args), c_embed=args.c_embed, c_prod=args.c_prod,
        c_log=args.c_log, symmetric=args.symmetric, density=args.density, threads=args.threads,
        csv_path=args.csv, summary_path=args.summary,
    )
    reports = bench.run_bench(cfg)
    with _open_out(cfg.csv_path) as fh:
        bench.write_csv(reports, fh)
    summary = {"command": "bench", "config": {k: v for k, v in vars(cfg).items() if not k.endswith("_path")},
               "methods": bench.summarize(reports, cfg.epsilon)}
    if cfg.summary_path:
        with open(cfg.summary_path, "w", encoding="utf-8") as fh:
            _emit(summary, fh)
    else:
        _emit(summary, sys.stderr if cfg.csv_path in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_verify(args):
    reports = verify.default_suite(seed=_seed(args), trials=args.trials, gma_trials=args.gma_trials,
                                   only=args.only)
    if not reports:
        raise InputError(f"--only {args.only} matches no property")
    with _open_out(args.report) as fh:
        for r in reports:
            _emit(r.to_dict(), fh)
    for r in reports:
        print(r.line(), file=sys.stderr)
    return EXIT_OK if all(r.verdict for r in reports) else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="gmapprox", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve min_X ||A - M X N||_F for Matrix Market inputs")
    p.add_argument("--a", required=True, help="A (m x n), array or coordinate format")
    p.add_argument("--m", required=True, help="M (m x c)")
    p.add_argument("--n", help="N (r x n); omitted for --method symmetric")
    p.add_argument("--method", choices=("exact", "sparse-gaussian", "leverage", "symmetric"), default="exact")
    p.add_argument("--sym-method", choices=("sparse-gaussian", "leverage"), default="sparse-gaussian",
                   help="sketch family used by --method symmetric")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--seed", type=int, help="64-bit seed (falls back to $GMA_SEED, then 0)")
    p.add_argument("--out", help="write X here (Matrix Market array)")
    p.add_argument("--report", help="write the JSON report record here (default stdout)")
    _add_constants(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser(
        "bench", help="run seeded trials on synthetic instances and emit CSV",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="CSV columns, in order:\n  " + ",".join(bench.CSV_COLUMNS)
        + "\nFloats carry 17 significant digits; empty cells mean not applicable.",
    )
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--n", type=int, help="default: m")
    p.add_argument("--c", type=int, default=8)
    p.add_argument("--r", type=int, help="default: c")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--noise", type=float, default=0.5, help="noise level eta (default 0.5)")
    p.add_argument("--methods", default="sparse-gaussian,leverage",
                   help="comma list from: " + ",".join(bench.ALL_METHODS))
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, help="64-bit seed (falls back to $GMA_SEED, then 0)")
    p.add_argument("--symmetric", action="store_true", help="symmetric family, N = M^T")
    p.add_argument("--density", type=float, help="sparse random A of this density")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--csv", default="-", help="CSV output path (default stdout)")
    p.add_argument("--summary", help="JSON summary path (default: stderr when CSV goes to stdout)")
    _add_constants(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run the property certification suite")
    p.add_argument("--seed", type=int, help="64-bit seed (falls back to $GMA_SEED, then 0)")
    p.add_argument("--trials", type=int, default=200, help="trials per sketch property")
    p.add_argument("--gma-trials", type=int, default=50, help="trials per solver property")
    p.add_argument("--only", action="append", help="keep properties whose name contains this (repeatable)")
    p.add_argument("--report", help="JSON-lines output (default stdout)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    # LinAlgError subclasses ValueError, so it must be caught first
    except (np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"gmapprox {args.command}: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, mmio.MatrixMarketError, ValueError, TypeError, OSError) as e:
        print(f"gmapprox {args.command}: error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
