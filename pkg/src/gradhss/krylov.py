"""ORTHODIR: minimal-residual Krylov iteration with full (long) recurrences."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import linops
from .linops import as_vector, auxiliary, axpy, counting, dot
from .reports import SolveReport, Status

__all__ = ["OrthodirState", "orthodir_solve", "orthodir_storage"]


@dataclass
class OrthodirState:
    """Stored directions q_j, their images A q_j and ||A q_j||^2."""

    directions: list[np.ndarray] = field(default_factory=list)
    images: list[np.ndarray] = field(default_factory=list)
    image_norms2: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.directions)

    def clear(self) -> None:
        self.directions.clear()
        self.images.clear()
        self.image_norms2.clear()


def orthodir_storage(i: int, n: int) -> int:
    """Scalars held at iteration i: 2i stored vectors plus 5 work vectors of length n."""
    return 2 * i * n + 5 * n


def orthodir_solve(a, b, tol: float = 1e-6, restart: int | None = None,
                   max_iter: int | None = None, x0=None, callback=None):
    """Solve ``a x = b`` by ORTHODIR.

    Iteration i (1-based) minimizes the residual along the newest direction,
    then builds the next one from ``A (A q_i)`` by modified Gram-Schmidt
    against the images of all i stored directions: i+2 dots, 2i+2 vector
    updates and one matvec. With ``restart`` the stored directions are dropped
    every ``restart`` iterations and the recurrence restarts from the residual.
    The stopping test uses the true residual ``||b - A x|| / ||b||``.

    ``callback(i, x, state)`` is called after every iteration.
    """
    n = a.n
    b = as_vector(b, n)
    max_iter = 10 * n if max_iter is None else max_iter
    if restart is not None and restart < 1:
        raise ValueError("restart period must be >= 1")
    report = SolveReport(method="ORTHODIR", per_iteration=[])
    state = OrthodirState()
    t0 = time.perf_counter()
    with counting("ORTHODIR") as scope:
        with auxiliary():
            bnorm = linops.norm(b)
            if x0 is None or not np.any(x0):
                x = np.zeros(n, dtype=np.complex128)
                r = b.copy()
            else:
                x = as_vector(x0, n).copy()
                r = b - a.apply(x)
            rel = linops.norm(r) / bnorm if bnorm else 0.0
        report.history.append(rel)

        def seed_direction():
            with auxiliary():
                aq = a.apply(r)
                state.directions.append(r.copy())
                state.images.append(aq)
                state.image_norms2.append(dot(aq, aq).real)

        if rel > tol:
            seed_direction()
        while rel > tol and report.iterations < max_iter:
            before = scope.core.copy()
            q, aq, aq2 = state.directions[-1], state.images[-1], state.image_norms2[-1]
            if aq2 == 0.0:
                report.status = Status.BREAKDOWN
                report.message = f"zero direction image at iteration {report.iterations + 1}"
                break
            alpha = dot(aq, r) / aq2
            x = axpy(alpha, q, x)
            r = axpy(-alpha, aq, r)
            report.iterations += 1
            i = report.iterations
            # next direction: A q_i made A-image-orthogonal to every stored image
            z = a.apply(aq)
            p_new = aq.copy()
            for qj, aqj, nj in zip(state.directions, state.images, state.image_norms2):
                beta = dot(aqj, z) / nj
                p_new = axpy(-beta, qj, p_new)
                z = axpy(-beta, aqj, z)
            state.directions.append(p_new)
            state.images.append(z)
            state.image_norms2.append(dot(z, z).real)
            report.per_iteration.append(scope.core - before)
            with auxiliary():
                rel = linops.norm(r) / bnorm
                if rel <= tol:
                    r = b - a.apply(x)
                    rel = linops.norm(r) / bnorm
            report.history.append(rel)
            if callback is not None:
                callback(i, x, state)
            if restart is not None and i % restart == 0 and rel > tol:
                state.clear()
                seed_direction()
            elif state.image_norms2[-1] <= (1e-30 * bnorm) ** 2 and rel > tol:
                report.status = Status.BREAKDOWN
                report.message = f"direction set exhausted at iteration {i}"
                break
        if report.status is not Status.BREAKDOWN:
            report.status = Status.CONVERGED if rel <= tol else Status.MAX_ITERS
        report.rel_residual = rel
    report.counters = scope.core.copy()
    report.aux_counters = scope.aux.copy()
    report.wall_time = time.perf_counter() - t0
    return x, report
