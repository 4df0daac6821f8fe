"""HSS outer iteration, the preadaptive variant, and spectral-radius tools."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linops
from .estimator import EstimatorConfig, GammaEstimate, preadapt
from .inner import InnerConfig, cgne_solve, solve_hermitian
from .linops import Counters, ShiftedOperator, SplitOperator, as_vector, auxiliary, axpy, counting
from .reports import Status

__all__ = [
    "HssConfig",
    "OuterReport",
    "hss_solve",
    "pahss_solve",
    "contraction_bound",
    "contraction_bound_list",
    "iteration_matrix_dense",
]

DENSE_MAX_N = 512


@dataclass
class HssConfig:
    gamma: float | None = None
    tol: float = 1e-6
    max_outer: int = 2000
    inner1: InnerConfig = field(default_factory=lambda: InnerConfig("CG", 1e-4))
    inner2: InnerConfig = field(default_factory=lambda: InnerConfig("CGNE", 1e-4))

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.inner2.method != "CGNE":
            raise ValueError("the skew-Hermitian half-step is solved by CGNE")

    @classmethod
    def race_preset(cls, inner: str = "CG") -> "HssConfig":
        """gamma = 1, eps1 = 1e-1, eps2 = 1e-4."""
        return cls(gamma=1.0, inner1=InnerConfig(inner, 1e-1), inner2=InnerConfig("CGNE", 1e-4))


@dataclass
class OuterReport:
    gamma: float
    outer_iterations: int = 0
    history: list[float] = field(default_factory=list)
    inner_iterations: list[tuple[int, int]] = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)
    aux_counters: Counters = field(default_factory=Counters)
    times: dict[str, float] = field(default_factory=dict)
    status: Status = Status.MAX_ITERS
    rel_residual: float = math.nan
    estimate: GammaEstimate | None = None
    inner_method: str = "CG"
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def total_inner(self) -> tuple[int, int]:
        return (sum(i for i, _ in self.inner_iterations), sum(j for _, j in self.inner_iterations))

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "outer_iterations": self.outer_iterations,
            "status": str(self.status),
            "rel_residual": self.rel_residual,
            "inner_method": self.inner_method,
            "inner_iterations": [list(p) for p in self.inner_iterations],
            "total_inner": list(self.total_inner),
            "counters": self.counters.to_dict(),
            "aux_counters": self.aux_counters.to_dict(),
            "times": dict(self.times),
            "history": list(self.history),
            "estimate": None if self.estimate is None else self.estimate.to_dict(),
            "message": self.message,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["outer", "rel_residual", "inner1", "inner2"])
            for k, r in enumerate(self.history):
                i1, i2 = self.inner_iterations[k - 1] if k else ("", "")
                w.writerow([k, repr(r), i1, i2])


def hss_solve(split_op: SplitOperator, b, cfg: HssConfig, x0=None):
    """Run the HSS iteration with shift ``cfg.gamma``.

    Each outer step solves (gamma I + H) x' = (gamma I - S) x + b with the
    configured Hermitian inner solver, then (gamma I + S) x'' = (gamma I - H) x' + b
    with CGNE. Stops when the true residual ||b - A x|| / ||b|| drops below
    ``cfg.tol``; an inner breakdown stops the run with status ``breakdown``.

    A warm-started half-step starts from the latest iterate. It is carried out
    as a solve for the correction, e.g. (gamma I + H) d = b - A x from zero,
    so the inner tolerance is relative to the current outer residual. Cold
    half-steps solve the system above from zero, relative to its right-hand side.
    """
    gamma = cfg.gamma
    if gamma is None or not gamma > 0:
        raise ValueError("hss_solve needs a positive gamma")
    n = split_op.n
    b = as_vector(b, n)
    h, s, a = split_op.h, split_op.s, split_op.a
    m1 = ShiftedOperator(h, gamma)
    cold1 = InnerConfig(cfg.inner1.method, cfg.inner1.tol, cfg.inner1.max_iter, warm_start=False)
    report = OuterReport(gamma=gamma, inner_method=cfg.inner1.method)
    t0 = time.perf_counter()
    with counting("HSS") as scope:
        bnorm = float(np.linalg.norm(b))
        x = np.zeros(n, dtype=np.complex128) if x0 is None else as_vector(x0, n).copy()
        if bnorm == 0.0:
            report.status, report.rel_residual, report.history = Status.CONVERGED, 0.0, [0.0]
            rel = 0.0
        else:
            r = axpy(-1.0, a.apply(x), b)
            with auxiliary():
                rel = linops.norm(r) / bnorm
            report.history.append(rel)
        while rel > cfg.tol and report.outer_iterations < cfg.max_outer:
            if cfg.inner1.warm_start:
                d, rep1 = solve_hermitian(m1, r, None, cold1)
                x_half = axpy(1.0, d, x)
            else:
                rhs1 = axpy(1.0, b, gamma * x - s.apply(x))
                x_half, rep1 = solve_hermitian(m1, rhs1, None, cold1)
            if cfg.inner2.warm_start:
                r_half = axpy(-1.0, a.apply(x_half), b)
                d, rep2 = cgne_solve(gamma, s, r_half, None, cfg.inner2.tol, cfg.inner2.max_iter)
                x_new = axpy(1.0, d, x_half)
            else:
                rhs2 = axpy(1.0, b, gamma * x_half - h.apply(x_half))
                x_new, rep2 = cgne_solve(gamma, s, rhs2, None, cfg.inner2.tol, cfg.inner2.max_iter)
            report.inner_iterations.append((rep1.iterations, rep2.iterations))
            for rep, label in ((rep1, "Hermitian"), (rep2, "skew-Hermitian")):
                if rep.status is Status.BREAKDOWN:
                    report.status = Status.BREAKDOWN
                    report.message = (f"{label} inner solve broke down at outer iteration "
                                      f"{report.outer_iterations + 1}: {rep.message}")
            if report.status is Status.BREAKDOWN:
                break
            x = x_new
            report.outer_iterations += 1
            # true residual from A; also the next right-hand side in correction form
            r = axpy(-1.0, a.apply(x), b)
            with auxiliary():
                rel = linops.norm(r) / bnorm
            report.history.append(rel)
            if not math.isfinite(rel):
                report.status = Status.BREAKDOWN
                report.message = "residual is not finite"
                break
        if report.status is not Status.BREAKDOWN:
            report.status = Status.CONVERGED if rel <= cfg.tol else Status.MAX_ITERS
        report.rel_residual = rel
    report.counters = scope.core.copy()
    report.aux_counters = scope.aux.copy()
    elapsed = time.perf_counter() - t0
    report.times = {"solve": elapsed, "total": elapsed}
    return x, report


def pahss_solve(split_op: SplitOperator, b, est_cfg: EstimatorConfig | None = None,
                cfg: HssConfig | None = None, x0=None):
    """Estimate gamma from gradient steps on H, then run HSS with it.

    The report carries the estimate and the time of both phases.
    """
    est_cfg = est_cfg or EstimatorConfig()
    cfg = cfg or HssConfig()
    t0 = time.perf_counter()
    est = preadapt(split_op, b, est_cfg)
    t_est = time.perf_counter() - t0
    run_cfg = HssConfig(gamma=est.value, tol=cfg.tol, max_outer=cfg.max_outer,
                        inner1=cfg.inner1, inner2=cfg.inner2)
    x, report = hss_solve(split_op, b, run_cfg, x0)
    report.estimate = est
    report.counters = report.counters + est.counters
    report.times = {"estimate": t_est, "solve": report.times["solve"],
                    "total": t_est + report.times["solve"]}
    return x, report


def contraction_bound(lam_min: float, lam_max: float, gamma: float) -> float:
    """max over [lam_min, lam_max] of |lam - gamma| / (lam + gamma).

    The maximand is monotone on either side of gamma, so the endpoints suffice.
    """
    if not (lam_min > 0 and lam_max >= lam_min and gamma > 0):
        raise ValueError("need 0 < lam_min <= lam_max and gamma > 0")
    return max(abs(lam_min - gamma) / (lam_min + gamma), abs(lam_max - gamma) / (lam_max + gamma))


def contraction_bound_list(eigenvalues, gamma: float) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0 or np.any(lam <= 0) or not gamma > 0:
        raise ValueError("eigenvalues and gamma must be positive")
    return float(np.max(np.abs(lam - gamma) / (lam + gamma)))


def iteration_matrix_dense(split_op: SplitOperator, gamma: float):
    """Dense T = (gI+S)^-1 (gI-H) (gI+H)^-1 (gI-S) and its spectral radius (test oracle)."""
    n = split_op.n
    if n > DENSE_MAX_N:
        raise ValueError(f"iteration_matrix_dense is limited to N <= {DENSE_MAX_N}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    h = split_op.h.toarray()
    s = split_op.s.toarray()
    eye = np.eye(n)
    m1, n1 = gamma * eye + h, gamma * eye - s
    m2, n2 = gamma * eye + s, gamma * eye - h
    for mat in (m1, m2):
        if np.linalg.cond(mat) > 1e14:
            raise np.linalg.LinAlgError("shifted factor is numerically singular")
    t = scipy.linalg.solve(m2, n2 @ scipy.linalg.solve(m1, n1))
    rho = float(np.max(np.abs(np.linalg.eigvals(t))))
    return t, rho
