"""Inner solvers for the two HSS half-steps.

CG or BB for ``(gamma I + H) x = r``, CGNE for ``(gamma I + S) x = r`` and a
dense direct solve used as a test oracle.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linops
from .graditer import NotHPDError, run_gradient
from .linops import as_vector, auxiliary, axpy, counting, dot, scale_add
from .reports import SolveReport, Status

__all__ = ["InnerConfig", "cg_solve", "bb_solve", "cgne_solve", "direct_solve", "solve_hermitian"]

RECOMPUTE_EVERY = 50
DIRECT_MAX_N = 4096


@dataclass
class InnerConfig:
    method: str = "CG"
    tol: float = 1e-4
    max_iter: int | None = None
    warm_start: bool = True

    def __post_init__(self):
        self.method = self.method.upper()
        if self.method not in ("CG", "BB", "CGNE", "DIRECT"):
            raise ValueError(f"unknown inner method {self.method!r}")
        if not 0 < self.tol < 1:
            raise ValueError("inner tolerance must lie in (0, 1)")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _finish(report: SolveReport, scope, t0: float) -> SolveReport:
    report.counters = scope.core.copy()
    report.aux_counters = scope.aux.copy()
    report.wall_time = time.perf_counter() - t0
    return report


def cg_solve(op, rhs, x0=None, tol: float = 1e-6, max_iter: int | None = None):
    """Conjugate gradients for an HPD operator.

    Per iteration: 2 dots, 3 vector updates, 1 matvec. The recurrence residual
    is replaced by the true residual every 50 iterations.
    """
    n = op.n
    rhs = as_vector(rhs, n)
    max_iter = 10 * n if max_iter is None else max_iter
    report = SolveReport(method="CG")
    t0 = time.perf_counter()
    with counting("CG") as scope:
        with auxiliary():
            bnorm = linops.norm(rhs)
            if x0 is None or not np.any(x0):
                x = np.zeros(n, dtype=np.complex128)
                r = rhs.copy()
            else:
                x = as_vector(x0, n).copy()
                r = rhs - op.apply(x)
            rho = dot(r, r).real
        if bnorm == 0.0:
            report.status, report.rel_residual, report.history = Status.CONVERGED, 0.0, [0.0]
            return np.zeros(n, dtype=np.complex128), _finish(report, scope, t0)
        rel = math.sqrt(rho) / bnorm
        report.history.append(rel)
        p = r.copy()
        while rel > tol and report.iterations < max_iter:
            q = op.apply(p)
            pq = dot(p, q).real
            if pq <= 0.0:
                report.status = Status.BREAKDOWN
                report.message = f"p^H A p = {pq:.3e} at iteration {report.iterations}"
                break
            alpha = rho / pq
            x = axpy(alpha, p, x)
            r = axpy(-alpha, q, r)
            rho_new = dot(r, r).real
            p = scale_add(r, rho_new / rho, p)
            rho = rho_new
            report.iterations += 1
            if report.iterations % RECOMPUTE_EVERY == 0:
                with auxiliary():
                    r = rhs - op.apply(x)
                    rho = dot(r, r).real
            rel = math.sqrt(rho) / bnorm
            report.history.append(rel)
        if report.status is not Status.BREAKDOWN:
            report.status = Status.CONVERGED if rel <= tol else Status.MAX_ITERS
        report.rel_residual = rel
    return x, _finish(report, scope, t0)


def bb_solve(op, rhs, x0=None, tol: float = 1e-6, max_iter: int | None = None):
    """Barzilai-Borwein iteration; per iteration 2 dots, 2 vector updates, 1 matvec."""
    try:
        x, _, report = run_gradient("BB", op, rhs, x0, tol=tol,
                                    max_iter=50 * op.n if max_iter is None else max_iter, depth=2)
    except NotHPDError as exc:
        report = SolveReport(method="BB", status=Status.BREAKDOWN, message=str(exc))
        return as_vector(x0 if x0 is not None else np.zeros(op.n), op.n), report
    return x, report


class _NormalOperator:
    """gamma^2 I - S^2 = (gamma I + S)^H (gamma I + S) for skew-Hermitian S."""

    def __init__(self, gamma: float, s):
        self.gamma = gamma
        self.s = s
        self.n = s.n

    def apply_with_sp(self, p):
        sp_ = self.s.apply(p)
        return self.gamma * self.gamma * p - self.s.apply(sp_), sp_


def cgne_solve(gamma: float, s, rhs, x0=None, tol: float = 1e-6, max_iter: int | None = None):
    """Solve ``(gamma I + S) x = rhs`` by CG on the normal equations.

    Runs CG on ``gamma^2 I - S^2`` with right-hand side ``(gamma I - S) rhs``.
    Convergence is measured on the original residual ``rhs - (gamma I + S) x``,
    which is carried along from the ``S p`` product the normal operator
    already forms; that bookkeeping is counted as auxiliary work.
    Per iteration: 2 dots, 3 vector updates, 2 matvecs.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    n = s.n
    rhs = as_vector(rhs, n)
    max_iter = 10 * n if max_iter is None else max_iter
    normal = _NormalOperator(gamma, s)
    report = SolveReport(method="CGNE")
    t0 = time.perf_counter()

    def original_residual(x):
        return rhs - (gamma * x + s.apply(x))

    with counting("CGNE") as scope:
        with auxiliary():
            bnorm = linops.norm(rhs)
            if x0 is None or not np.any(x0):
                x = np.zeros(n, dtype=np.complex128)
                r_orig = rhs.copy()
            else:
                x = as_vector(x0, n).copy()
                r_orig = original_residual(x)
            r = gamma * r_orig - s.apply(r_orig)
            rho = dot(r, r).real
            rel = linops.norm(r_orig) / bnorm if bnorm else 0.0
        if bnorm == 0.0:
            report.status, report.rel_residual, report.history = Status.CONVERGED, 0.0, [0.0]
            return np.zeros(n, dtype=np.complex128), _finish(report, scope, t0)
        report.history.append(rel)
        p = r.copy()
        while rel > tol and report.iterations < max_iter:
            q, sp_ = normal.apply_with_sp(p)
            pq = dot(p, q).real
            if pq <= 0.0:
                report.status = Status.BREAKDOWN
                report.message = f"p^H N p = {pq:.3e} at iteration {report.iterations}"
                break
            alpha = rho / pq
            x = axpy(alpha, p, x)
            r = axpy(-alpha, q, r)
            rho_new = dot(r, r).real
            with auxiliary():
                # (gamma I + S) p reuses the S p product of the normal operator
                r_orig = axpy(-alpha, gamma * p + sp_, r_orig)
            p = scale_add(r, rho_new / rho, p)
            rho = rho_new
            report.iterations += 1
            with auxiliary():
                if report.iterations % RECOMPUTE_EVERY == 0:
                    r_orig = original_residual(x)
                    r = gamma * r_orig - s.apply(r_orig)
                    rho = dot(r, r).real
                rel = linops.norm(r_orig) / bnorm
                if rel <= tol:
                    # confirm against the true residual before stopping
                    r_orig = original_residual(x)
                    rel = linops.norm(r_orig) / bnorm
            report.history.append(rel)
        if report.status is not Status.BREAKDOWN:
            report.status = Status.CONVERGED if rel <= tol else Status.MAX_ITERS
        report.rel_residual = rel
    return x, _finish(report, scope, t0)


def direct_solve(op, rhs) -> np.ndarray:
    """Dense LU solve; test oracle for systems with at most 4096 unknowns."""
    a = op.toarray() if hasattr(op, "toarray") else np.asarray(op)
    a = np.asarray(a, dtype=np.complex128)
    if a.shape[0] > DIRECT_MAX_N:
        raise ValueError(f"direct_solve is limited to N <= {DIRECT_MAX_N}")
    rhs = as_vector(rhs, a.shape[0])
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(a, rhs)
        except scipy.linalg.LinAlgWarning as exc:
            raise np.linalg.LinAlgError(f"matrix is singular to working precision: {exc}") from None


def solve_hermitian(op, rhs, x0, cfg: InnerConfig):
    """Dispatch the Hermitian half-step to CG, BB or the dense solver."""
    x0 = x0 if cfg.warm_start else None
    if cfg.method == "CG":
        return cg_solve(op, rhs, x0, cfg.tol, cfg.max_iter)
    if cfg.method == "BB":
        return bb_solve(op, rhs, x0, cfg.tol, cfg.max_iter)
    if cfg.method == "DIRECT":
        t0 = time.perf_counter()
        x = direct_solve(op, rhs)
        rel = float(np.linalg.norm(rhs - op.toarray() @ x) / max(np.linalg.norm(rhs), 1e-300))
        return x, SolveReport(method="direct", iterations=1, rel_residual=rel, history=[rel],
                              status=Status.CONVERGED, wall_time=time.perf_counter() - t0)
    raise ValueError(f"{cfg.method} cannot solve the Hermitian half-step")
