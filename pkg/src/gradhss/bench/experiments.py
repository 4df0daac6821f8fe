"""Experiment runners behind the benchmark CLI.

Each runner returns a list of per-run rows (flat dicts) and writes any
per-iteration series under ``<out>/series``. :func:`run` adds the shared
artifacts: ``runs.csv``, ``aggregate.json`` and ``manifest.json``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import platform
import statistics
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..estimator import EstimatorConfig, estimate_direct, estimate_shifted
from ..graditer import q_eval, run_gradient
from ..hss import HssConfig, contraction_bound, hss_solve, iteration_matrix_dense, pahss_solve
from ..inner import InnerConfig
from ..krylov import orthodir_solve
from ..linops import ShiftedOperator, split
from ..problems import make_rhs
from ..reports import Status
from .config import ExperimentConfig, Problem, resolve_problem

log = logging.getLogger(__name__)


class ExperimentFailed(RuntimeError):
    pass


def _rhs(cfg: ExperimentConfig, problem: Problem, seed: int) -> np.ndarray:
    n = problem.operator.n
    if cfg.rhs == "ones":
        return make_rhs("ones", n)
    if cfg.rhs == "complex-uniform":
        return make_rhs("complex-uniform", n, -10.0, 10.0, seed)
    if cfg.rhs == "from-solution":
        return make_rhs("from-solution", n, operator=problem.operator, solution=np.ones(n))
    raise ValueError(f"unknown rhs kind {cfg.rhs!r}")


def _map(cfg: ExperimentConfig, fn, items):
    items = list(items)
    if cfg.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _estimator_cfg(cfg: ExperimentConfig, eta: int | None = None) -> EstimatorConfig:
    extra = {} if cfg.stagnation else {"stop_on_stagnation": False}
    return EstimatorConfig(lineage=cfg.lineage, mode=cfg.mode, shift=cfg.shift,
                           eta=cfg.eta if eta is None else eta, gamma_floor=cfg.gamma_floor, **extra)


def _hss_cfg(cfg: ExperimentConfig, inner: str | None = None, gamma=None) -> HssConfig:
    return HssConfig(gamma=gamma, tol=cfg.eps, max_outer=cfg.max_outer,
                     inner1=InnerConfig((inner or cfg.inner).upper(), cfg.eps1, warm_start=cfg.warm_start),
                     inner2=InnerConfig("CGNE", cfg.eps2, warm_start=cfg.warm_start))


# ---------------------------------------------------------------------------
# runners


def run_gradient_trace(cfg: ExperimentConfig, series: Path) -> list[dict]:
    problem = resolve_problem(cfg.problem)
    b = _rhs(cfg, problem, cfg.seed)
    _, trace, report = run_gradient(cfg.lineage, problem.operator, b, tol=0.0, max_iter=cfg.iters)
    trace.to_csv(series / "trace.csv")
    report.history_csv(series / "history.csv")
    # Q_n curves on a common grid, plus the limit curve when the spectrum is known
    reps = sorted({n for n in (1, 2, 3, 5, 10, 20, 50, 100, 200, 500) if n < len(trace)}
                  | ({len(trace) - 1} if len(trace) > 1 else set()))
    alpha_max = 1.2 / problem.lam_min if problem.lam_min else 1.2 * max(trace.alpha)
    grid = np.linspace(0.0, alpha_max, 241)
    with open(series / "q_curves.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["alpha"] + [f"Q_{n}" for n in reps]
        if problem.lam_min:
            header.append("Q_limit")
        w.writerow(header)
        derived = [trace.derived(n) for n in reps]
        for a in grid:
            row = [repr(float(a))] + [repr(float(d.q(a))) for d in derived]
            if problem.lam_min:
                lim = q_eval(problem.lam_min * problem.lam_max, problem.lam_min + problem.lam_max, a)
                row.append(repr(float(lim)))
            w.writerow(row)
    rows = []
    for n in range(1, len(trace)):
        d = trace.derived(n)
        rows.append({"n": n, "alpha": trace.steplength(n), "grad_norm": trace.norm(n),
                     "gamma": d.gamma, "alpha_a": d.alpha_a,
                     "alpha_y": math.nan if d.alpha_y is None else d.alpha_y,
                     "alpha_z": math.nan if d.alpha_z is None else d.alpha_z})
    return rows


def run_estimate(cfg: ExperimentConfig, series: Path) -> list[dict]:
    problem = resolve_problem(cfg.problem)
    ecfg = _estimator_cfg(cfg)

    def one(rep):
        seed = cfg.seed + rep
        b = _rhs(cfg, problem, seed)
        if cfg.mode == "direct":
            est = estimate_direct(problem.operator, b, ecfg)
        else:
            est = estimate_shifted(ShiftedOperator(problem.operator, cfg.shift), cfg.shift, b, ecfg)
        est.to_csv(series / f"estimate_rep{rep}.csv")
        gs = problem.gamma_star
        return {"rep": rep, "seed": seed, "gamma_hat": est.value, "iterations": est.iterations,
                "reason": est.reason, "gamma_star": gs if gs else math.nan,
                "rel_error": abs(est.value - gs) / gs if gs else math.nan,
                "seconds": est.wall_time}

    return _map(cfg, one, range(cfg.reps))


def run_gamma_sweep(cfg: ExperimentConfig, series: Path) -> list[dict]:
    refs = [f"cd3d:m={m}" for m in cfg.sizes] if cfg.sizes else [cfg.problem]
    problems = {ref: resolve_problem(ref) for ref in refs}
    splits = {ref: split(p.operator) for ref, p in problems.items()}
    rhs = {ref: _rhs(cfg, p, cfg.seed) for ref, p in problems.items()}
    points = [(ref, g) for ref in refs for g in cfg.gamma_grid()]

    def one(point):
        ref, g = point
        _, rep = hss_solve(splits[ref], rhs[ref], _hss_cfg(cfg, gamma=g))
        if rep.status is Status.BREAKDOWN:
            raise ExperimentFailed(f"{ref} gamma={g}: {rep.message}")
        i1, i2 = rep.total_inner
        p = problems[ref]
        return {"problem": ref, "n": p.operator.n, "gamma": g, "outer": rep.outer_iterations,
                "inner1": i1, "inner2": i2, "status": str(rep.status),
                "gamma_star": p.gamma_star if p.gamma_star else math.nan, "seconds": rep.times["total"]}

    return _map(cfg, one, points)


def run_pahss(cfg: ExperimentConfig, series: Path) -> list[dict]:
    problem = resolve_problem(cfg.problem)
    sp_ = split(problem.operator)
    etas = list(cfg.etas) if cfg.etas else [cfg.eta]
    jobs = [(eta, rep) for eta in etas for rep in range(cfg.reps)]

    def one(job):
        eta, rep = job
        seed = cfg.seed + rep
        b = _rhs(cfg, problem, seed)
        _, report = pahss_solve(sp_, b, _estimator_cfg(cfg, eta), _hss_cfg(cfg))
        if report.status is Status.BREAKDOWN:
            raise ExperimentFailed(f"eta={eta} rep={rep}: {report.message}")
        report.to_csv(series / f"pahss_eta{eta}_rep{rep}.csv")
        i1, i2 = report.total_inner
        return {"eta": eta, "rep": rep, "seed": seed, "gamma_hat": report.gamma,
                "outer": report.outer_iterations, "inner1": i1, "inner2": i2,
                "matvecs": report.counters.matvecs + report.aux_counters.matvecs,
                "status": str(report.status), "rel_residual": report.rel_residual,
                "t_estimate": report.times["estimate"], "t_solve": report.times["solve"],
                "seconds": report.times["total"]}

    return _map(cfg, one, jobs)


def run_solver_race(cfg: ExperimentConfig, series: Path) -> list[dict]:
    problem = resolve_problem(cfg.problem)
    sp_ = split(problem.operator)
    gamma = cfg.gamma if cfg.gamma is not None else 1.0
    jobs = [(m, rep) for m in cfg.methods for rep in range(cfg.reps)]

    def one(job):
        method, rep = job
        seed = cfg.seed + rep
        b = _rhs(cfg, problem, seed)
        if method.upper() == "ORTHODIR":
            _, r = orthodir_solve(problem.operator, b, cfg.eps, restart=cfg.restart)
            if r.status is Status.BREAKDOWN:
                raise ExperimentFailed(f"ORTHODIR rep={rep}: {r.message}")
            r.history_csv(series / f"ORTHODIR_rep{rep}.csv")
            r.to_json(series / f"ORTHODIR_rep{rep}.json")
            return {"method": "ORTHODIR", "rep": rep, "seed": seed, "iterations": r.iterations,
                    "outer": r.iterations, "inner1": 0, "inner2": 0, "status": str(r.status),
                    "matvecs": r.counters.matvecs + r.aux_counters.matvecs, "seconds": r.wall_time}
        inner = method.upper().removeprefix("HSS-")
        _, r = hss_solve(sp_, b, _hss_cfg(cfg, inner=inner, gamma=gamma))
        if r.status is Status.BREAKDOWN:
            raise ExperimentFailed(f"{method} rep={rep}: {r.message}")
        r.to_csv(series / f"{method}_rep{rep}.csv")
        i1, i2 = r.total_inner
        return {"method": method, "rep": rep, "seed": seed, "iterations": i1 + i2,
                "outer": r.outer_iterations, "inner1": i1, "inner2": i2, "status": str(r.status),
                "matvecs": r.counters.matvecs + r.aux_counters.matvecs, "seconds": r.times["total"]}

    return _map(cfg, one, jobs)


def run_bound_check(cfg: ExperimentConfig, series: Path) -> list[dict]:
    problem = resolve_problem(cfg.problem)
    sp_ = split(problem.operator)
    lam = np.linalg.eigvalsh(sp_.h.toarray())
    gs = math.sqrt(lam[0] * lam[-1])
    gammas = list(cfg.gammas) if cfg.gammas else [gs / 2, gs, 2 * gs]
    rows = []
    for g in gammas:
        _, rho = iteration_matrix_dense(sp_, g)
        bound = contraction_bound(lam[0], lam[-1], g)
        rows.append({"gamma": g, "rho": rho, "bound": bound, "gamma_star": gs,
                     "converges": rho < 1.0, "dominated": rho <= bound + 1e-12})
    bad = [r for r in rows if not (r["converges"] and r["dominated"])]
    if bad:
        raise ExperimentFailed(f"bound check failed at gamma={[r['gamma'] for r in bad]}")
    return rows


RUNNERS = {
    "gradient-trace": (run_gradient_trace, ()),
    "estimate": (run_estimate, ()),
    "gamma-sweep": (run_gamma_sweep, ("problem", "gamma")),
    "pahss": (run_pahss, ("eta",)),
    "solver-race": (run_solver_race, ("method",)),
    "bound-check": (run_bound_check, ("gamma",)),
}


# ---------------------------------------------------------------------------
# aggregation and output


def aggregate(rows: list[dict], group_by: tuple[str, ...]) -> list[dict]:
    """Mean and median of every numeric column, per group."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row.get(k) for k in group_by), []).append(row)
    out = []
    for key, members in groups.items():
        entry = dict(zip(group_by, key))
        entry["count"] = len(members)
        for col in members[0]:
            if col in group_by:
                continue
            vals = [m[col] for m in members]
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
                entry[f"{col}_mean"] = statistics.fmean(vals)
                entry[f"{col}_median"] = statistics.median(vals)
        out.append(entry)
    return out


def _write_rows(path: Path, rows: list[dict]) -> None:
    cols: list[str] = []
    for row in rows:
        cols.extend(c for c in row if c not in cols)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def run(cfg: ExperimentConfig) -> int:
    """Execute an experiment; returns a process exit status."""
    out = Path(cfg.out)
    series = out / "series"
    series.mkdir(parents=True, exist_ok=True)
    runner, group_by = RUNNERS[cfg.kind]
    manifest = {
        "kind": cfg.kind,
        "config": cfg.to_dict(),
        "seeds": [cfg.seed + r for r in range(cfg.reps)],
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    t0 = time.perf_counter()
    status = 0
    rows: list[dict] = []
    try:
        rows = runner(cfg, series)
    except Exception as exc:  # partial artifacts are kept with a failure marker
        status = 1
        manifest["failure"] = f"{type(exc).__name__}: {exc}"
        (out / "FAILED").write_text(traceback.format_exc())
        log.error("experiment %s failed: %s", cfg.kind, exc)
    manifest["wall_time"] = time.perf_counter() - t0
    manifest["status"] = "ok" if status == 0 else "failed"
    if rows:
        _write_rows(out / "runs.csv", rows)
        with open(out / "aggregate.json", "w") as fh:
            json.dump(_jsonable({"kind": cfg.kind, "group_by": list(group_by),
                                 "groups": aggregate(rows, group_by)}), fh, indent=2)
    with open(out / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2)
    return status
