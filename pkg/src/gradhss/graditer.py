"""Gradient iterations for Hermitian positive definite systems.

Steepest descent (SD), minimal gradient (MG) and their lagged Barzilai-Borwein
counterparts (BB, BB2) for ``H x = b``, with a trace of the auxiliary
steplength quantities whose limits expose the extreme eigenvalues of ``H``.
"""
from __future__ import annotations

import csv
import math
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from . import linops
from .linops import as_vector, auxiliary, axpy, counting, dot
from .reports import SolveReport, Status

RECOMPUTE_EVERY = 50


class NotHPDError(ArithmeticError):
    """A nonpositive Rayleigh quotient was met."""


class InsufficientHistory(ValueError):
    """Derived quantities need two consecutive trace entries."""


class SteplengthKind(str, Enum):
    SD = "SD"
    MG = "MG"
    BB = "BB"
    BB2 = "BB2"

    @property
    def lineage(self) -> "SteplengthKind":
        return SteplengthKind.SD if self in (SteplengthKind.SD, SteplengthKind.BB) else SteplengthKind.MG

    @property
    def lagged(self) -> bool:
        return self in (SteplengthKind.BB, SteplengthKind.BB2)


def _kind(kind) -> SteplengthKind:
    return kind if isinstance(kind, SteplengthKind) else SteplengthKind(str(kind).upper())


def steplength(kind, g: np.ndarray, hg: np.ndarray, previous: float | None = None) -> float | None:
    """Steplength for gradient ``g`` given ``hg = H g``.

    SD is ``<g,g>/<g,Hg>`` and MG is ``<g,Hg>/<g,H^2 g>`` (with
    ``<g,H^2 g> = ||Hg||^2`` for Hermitian H). BB/BB2 return ``previous``, the
    SD/MG value of the preceding iterate, or fall back to the current SD/MG
    value when ``previous`` is None. Returns None for a zero gradient.
    """
    kind = _kind(kind)
    gg = dot(g, g).real
    if gg == 0.0:
        return None
    if kind.lagged and previous is not None:
        return float(previous)
    ghg = dot(g, hg).real
    if ghg <= 0.0:
        raise NotHPDError(f"Rayleigh quotient {ghg / gg:.3e} is not positive")
    if kind.lineage is SteplengthKind.SD:
        return gg / ghg
    return ghg / dot(hg, hg).real


def gradient_update(x: np.ndarray, g: np.ndarray, alpha: float, hg: np.ndarray):
    """x' = x - alpha g, g' = g - alpha Hg."""
    return axpy(-alpha, g, x), axpy(-alpha, hg, g)


def q_eval(gamma: float, alpha_ra: float, alpha):
    """Quadratic Q(alpha) = gamma alpha^2 - alpha_ra alpha + 1, whose roots are alpha^Y, alpha^Z."""
    return gamma * alpha * alpha - alpha_ra * alpha + 1.0


@dataclass(frozen=True)
class Derived:
    """Auxiliary quantities at iteration ``n`` (``alpha_a`` is alpha^A2 for MG lineage)."""

    n: int
    alpha_a: float
    alpha_ra: float
    gamma: float
    discriminant: float
    alpha_y: float | None
    alpha_z: float | None

    def q(self, alpha):
        return q_eval(self.gamma, self.alpha_ra, alpha)


def derived_from(alpha_prev: float, alpha_cur: float, w_prev: float, w_cur: float, n: int = 1) -> Derived:
    """Derived quantities from two consecutive lineage steplengths and weights.

    ``w`` is ``||g||^2`` for the SD lineage and ``<g, Hg>`` for the MG lineage.
    """
    alpha_ra = 1.0 / alpha_prev + 1.0 / alpha_cur
    gamma = 1.0 / (alpha_prev * alpha_cur) - w_cur / (alpha_prev * alpha_prev * w_prev)
    disc = alpha_ra * alpha_ra - 4.0 * gamma
    if disc >= 0.0:
        root = math.sqrt(disc)
        alpha_y = 2.0 / (alpha_ra + root)
        alpha_z = 2.0 / (alpha_ra - root) if alpha_ra > root else math.inf
    else:
        alpha_y = alpha_z = None
    return Derived(n, 1.0 / alpha_ra, alpha_ra, gamma, disc, alpha_y, alpha_z)


class GradientTrace:
    """Per-iteration record of a gradient run.

    Entry ``n`` describes iterate ``n``: the steplength taken from it, its
    gradient norm, the lineage steplength (SD or MG Rayleigh-type quotient, which
    differs from the step taken only for BB/BB2) and the lineage weight.
    With ``depth=2`` only the last two entries are retained.
    """

    def __init__(self, lineage, depth: int | None = None):
        self.lineage = _kind(lineage).lineage
        self.depth = depth
        self.alpha: deque[float] = deque(maxlen=depth)
        self.lineage_alpha: deque[float] = deque(maxlen=depth)
        self.grad_norm: deque[float] = deque(maxlen=depth)
        self.weight: deque[float] = deque(maxlen=depth)
        self.count = 0

    def __len__(self) -> int:
        return self.count

    @property
    def first(self) -> int:
        return self.count - len(self.alpha)

    def record(self, alpha: float, lineage_alpha: float, grad_norm: float, weight: float) -> None:
        self.alpha.append(alpha)
        self.lineage_alpha.append(lineage_alpha)
        self.grad_norm.append(grad_norm)
        self.weight.append(weight)
        self.count += 1

    def _at(self, seq: deque, n: int) -> float:
        if n < 0:
            n += self.count
        i = n - self.first
        if not 0 <= i < len(seq):
            raise IndexError(f"trace entry {n} not retained")
        return seq[i]

    def steplength(self, n: int) -> float:
        return self._at(self.alpha, n)

    def norm(self, n: int) -> float:
        return self._at(self.grad_norm, n)

    def derived(self, n: int) -> Derived:
        if n < 0:
            n += self.count
        if n < 1:
            raise InsufficientHistory("derived quantities need n >= 1")
        return derived_from(self._at(self.lineage_alpha, n - 1), self._at(self.lineage_alpha, n),
                            self._at(self.weight, n - 1), self._at(self.weight, n), n)

    def rows(self):
        for n in range(self.first, self.count):
            d = self.derived(n) if n >= max(1, self.first + 1) else None
            yield n, self.steplength(n), self.norm(n), d

    def to_csv(self, path) -> None:
        def fmt(v):
            return "" if v is None else repr(float(v))

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "alpha", "grad_norm", "alpha_a", "gamma_sqrt", "alpha_y", "alpha_z",
                        "discriminant"])
            for n, a, gn, d in self.rows():
                if d is None:
                    w.writerow([n, fmt(a), fmt(gn), "", "", "", "", ""])
                else:
                    gs = math.sqrt(d.gamma) if d.gamma >= 0 else None
                    w.writerow([n, fmt(a), fmt(gn), fmt(d.alpha_a), fmt(gs), fmt(d.alpha_y),
                                fmt(d.alpha_z), fmt(d.discriminant)])


@dataclass
class GradientState:
    n: int
    x: np.ndarray
    g: np.ndarray
    grad_norm: float


def iterate_gradient(kind, h, b, x0=None, trace: GradientTrace | None = None) -> Iterator[GradientState]:
    """Yield the state after every gradient step on ``h x = b``.

    The generator never stops by itself unless the gradient vanishes exactly;
    callers decide convergence. Each step costs one matvec, two dot products
    and two vector updates (MG lineage needs one more dot for ``||Hg||^2``).
    """
    kind = _kind(kind)
    sd_lineage = kind.lineage is SteplengthKind.SD
    b = as_vector(b, h.n)
    with auxiliary():
        if x0 is None or not np.any(x0):
            x = np.zeros(h.n, dtype=np.complex128)
            g = -b
        else:
            x = as_vector(x0, h.n).copy()
            g = h.apply(x) - b
        gg = dot(g, g).real
    if trace is None:
        trace = GradientTrace(kind)
    previous = None
    n = 0
    while gg > 0.0:
        hg = h.apply(g)
        ghg = dot(g, hg).real
        if ghg <= 0.0:
            raise NotHPDError(f"Rayleigh quotient {ghg / gg:.3e} at iteration {n} is not positive")
        if sd_lineage:
            lin = gg / ghg
            weight = gg
        else:
            lin = ghg / dot(hg, hg).real
            weight = ghg
        alpha = previous if (kind.lagged and previous is not None) else lin
        previous = lin
        trace.record(alpha, lin, math.sqrt(gg), weight)
        x, g = gradient_update(x, g, alpha, hg)
        n += 1
        if n % RECOMPUTE_EVERY == 0:
            with auxiliary():
                g = h.apply(x) - b
        gg = dot(g, g).real
        yield GradientState(n, x, g, math.sqrt(gg))


def run_gradient(kind, h, b, x0=None, tol: float = 1e-6, max_iter: int | None = None,
                 depth: int | None = None):
    """Solve ``h x = b`` by a gradient iteration.

    Stops when ``||g_n|| / ||b|| <= tol`` or after ``max_iter`` steps (default
    50 N). Returns ``(x, trace, report)``; running out of iterations is a
    ``max-iters`` status, not an exception.
    """
    kind = _kind(kind)
    b = as_vector(b, h.n)
    if max_iter is None:
        max_iter = 50 * h.n
    trace = GradientTrace(kind, depth)
    report = SolveReport(method=kind.value)
    t0 = time.perf_counter()
    with counting(kind.value) as scope:
        with auxiliary():
            bnorm = linops.norm(b)
        if bnorm == 0.0:
            x = np.zeros(h.n, dtype=np.complex128)
            report.status = Status.CONVERGED
            report.rel_residual = 0.0
            report.history = [0.0]
        else:
            x = np.zeros(h.n, dtype=np.complex128) if x0 is None else as_vector(x0, h.n).copy()
            steps = iterate_gradient(kind, h, b, x, trace)
            with auxiliary():
                r0 = linops.norm(h.apply(x) - b) / bnorm if np.any(x) else 1.0
            report.history.append(r0)
            rel = r0
            while rel > tol and report.iterations < max_iter:
                try:
                    state = next(steps)
                except StopIteration:
                    rel = 0.0
                    break
                x = state.x
                rel = state.grad_norm / bnorm
                report.iterations = state.n
                report.history.append(rel)
            report.status = Status.CONVERGED if rel <= tol else Status.MAX_ITERS
            report.rel_residual = rel
    report.counters = scope.core.copy()
    report.aux_counters = scope.aux.copy()
    report.wall_time = time.perf_counter() - t0
    return x, trace, report
