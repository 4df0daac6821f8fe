"""Command-line entry point: ``gradhss <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from ..linops import write_matrix_market, write_vector
from ..reports import SolveReport
from .audit import audit_counters
from .config import load_config, resolve_problem
from .experiments import _jsonable, run

WORKERS_ENV = "GRADHSS_WORKERS"

SUBCOMMANDS = {
    "trace": "gradient-trace",
    "estimate": "estimate",
    "sweep": "gamma-sweep",
    "pahss": "pahss",
    "race": "solver-race",
    "bound-check": "bound-check",
}


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags take precedence")
    p.add_argument("--problem", help="problem reference, e.g. cd3d:m=16,theta=1")
    p.add_argument("--rhs", choices=["ones", "complex-uniform", "from-solution"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--gamma-floor", type=float)
    p.add_argument("--eta", type=int)
    p.add_argument("--etas", help="comma-separated eta values (pahss)")
    p.add_argument("--stagnation", action="store_const", const=True,
                   help="let the estimator stop early on stagnation")
    p.add_argument("--lineage", choices=["SD", "MG"])
    p.add_argument("--mode", choices=["direct", "shifted"])
    p.add_argument("--shift", type=float, help="shift used by the shifted estimator")
    p.add_argument("--eps", type=float, help="outer tolerance")
    p.add_argument("--eps1", type=float, help="Hermitian half-step tolerance")
    p.add_argument("--eps2", type=float, help="skew-Hermitian half-step tolerance")
    p.add_argument("--inner", choices=["cg", "bb"])
    p.add_argument("--cold-start", dest="warm_start", action="store_const", const=False,
                   help="start inner solves from zero")
    p.add_argument("--restart", type=int, help="ORTHODIR restart period")
    p.add_argument("--max-outer", type=int)
    p.add_argument("--iters", type=int, help="gradient steps for trace")
    p.add_argument("--sizes", help="comma-separated cd3d grid sizes (sweep)")
    p.add_argument("--gammas", help="comma-separated gamma values")
    p.add_argument("--gamma-range", help="lo,hi,step")
    p.add_argument("--methods", help="comma-separated: HSS-CG,HSS-BB,ORTHODIR")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--workers", type=int, help=f"parallel runs (default ${WORKERS_ENV} or 1)")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradhss", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    prob = sub.add_parser("problem", help="problem generators")
    prob_sub = prob.add_subparsers(dest="action", required=True)
    gen = prob_sub.add_parser("gen", help="write a problem as Matrix Market plus JSON sidecar")
    gen.add_argument("--problem", required=True)
    gen.add_argument("--rhs", choices=["ones", "complex-uniform", "from-solution"])
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default="problem")

    for name, kind in SUBCOMMANDS.items():
        _experiment_flags(sub.add_parser(name, help=f"run the {kind} experiment"))

    audit = sub.add_parser("audit", help="check per-iteration operation counts against the cost table")
    audit.add_argument("report", nargs="?", help="SolveReport JSON; omit to run a fresh solve")
    audit.add_argument("--method", help="CG, BB, CGNE or ORTHODIR")
    audit.add_argument("--problem", default="cd3d:m=9", help="problem for a fresh solve")
    audit.add_argument("--eps", type=float, default=1e-6)
    audit.add_argument("--gamma", type=float, default=1.0, help="shift for CGNE")
    audit.add_argument("--seed", type=int, default=0)
    audit.add_argument("--out", help="write the fresh report as JSON")
    return parser


def _problem_gen(args) -> int:
    problem = resolve_problem(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_market(out / "matrix.mtx", problem.operator, comment=args.problem)
    sidecar = {"ref": args.problem, "n": problem.operator.n, "nnz": problem.operator.nnz,
               "seed": args.seed, **problem.meta}
    if args.rhs:
        from ..problems import make_rhs
        n = problem.operator.n
        if args.rhs == "from-solution":
            b = make_rhs("from-solution", n, operator=problem.operator, solution=np.ones(n))
        else:
            b = make_rhs(args.rhs, n, seed=args.seed)
        write_vector(out / "rhs.txt", b)
        sidecar["rhs"] = args.rhs
    (out / "matrix.json").write_text(json.dumps(_jsonable(sidecar), indent=2))
    print(f"wrote {out / 'matrix.mtx'} (n={problem.operator.n}, nnz={problem.operator.nnz})")
    return 0


def _fresh_report(args) -> SolveReport:
    from ..inner import bb_solve, cg_solve, cgne_solve
    from ..krylov import orthodir_solve
    from ..linops import split
    from ..problems import make_rhs

    method = (args.method or "CG").upper()
    op = resolve_problem(args.problem).operator
    b = make_rhs("complex-uniform", op.n, seed=args.seed)
    if method == "ORTHODIR":
        return orthodir_solve(op, b, args.eps)[1]
    parts = split(op)
    if method == "CG":
        return cg_solve(parts.h, b, tol=args.eps)[1]
    if method == "BB":
        return bb_solve(parts.h, b, tol=args.eps)[1]
    if method == "CGNE":
        return cgne_solve(args.gamma, parts.s, b, tol=args.eps)[1]
    raise ValueError(f"no cost row for method {method!r}")


def _audit(args) -> int:
    try:
        if args.report:
            with open(args.report) as fh:
                report = SolveReport.from_dict(json.load(fh))
        else:
            report = _fresh_report(args)
            if args.out:
                report.to_json(args.out)
        result = audit_counters(report, args.method)
    except (ValueError, OSError, KeyError) as exc:
        print(f"gradhss: {exc}", file=sys.stderr)
        return 2
    for line in result.lines:
        print(line)
    print(f"{result.method}: {'PASS' if result.passed else 'FAIL'}")
    return 0 if result.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "problem":
        return _problem_gen(args)
    if args.command == "audit":
        return _audit(args)
    kind = SUBCOMMANDS[args.command]
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "verbose") and v is not None}
    if "workers" not in overrides and os.environ.get(WORKERS_ENV):
        overrides["workers"] = int(os.environ[WORKERS_ENV])
    try:
        cfg = load_config(args.config, kind, overrides)
    except (ValueError, FileNotFoundError) as exc:
        print(f"gradhss: {exc}", file=sys.stderr)
        return 2
    status = run(cfg)
    print(f"{kind}: {'ok' if status == 0 else 'FAILED'} -> {cfg.out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
