"""Estimating the HSS shift sqrt(lambda_1(H) lambda_N(H)) from gradient iterations.

A few SD (or MG) steps on a system with the Hermitian part H, or on the
shifted system (shift I + H), produce Gamma_n and alpha^RA_n; their limits
give the product and the sum of the extreme eigenvalues of the operator the
iteration runs on.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graditer import GradientTrace, SteplengthKind, iterate_gradient
from .linops import Counters, ShiftedOperator, SplitOperator, as_vector, counting

__all__ = [
    "EstimationFailed",
    "EstimatorConfig",
    "EstimatePoint",
    "GammaEstimate",
    "estimate_direct",
    "estimate_shifted",
    "preadapt",
]


class EstimationFailed(RuntimeError):
    pass


@dataclass
class EstimatorConfig:
    lineage: str = "SD"
    mode: str = "direct"
    shift: float = 1.0
    eta: int = 50
    stagnation_tol: float = 1e-2
    window: int = 3
    stop_on_stagnation: bool = True
    gamma_floor: float = 0.0
    # relative gradient norm treated as an exact solve
    vanish_tol: float = 1e-13

    def __post_init__(self):
        self.lineage = SteplengthKind(str(self.lineage).upper()).lineage.value
        if self.mode not in ("direct", "shifted"):
            raise ValueError(f"mode must be 'direct' or 'shifted', got {self.mode!r}")
        if self.eta < 2:
            raise ValueError("eta must be at least 2")
        if not self.stagnation_tol > 0:
            raise ValueError("stagnation_tol must be positive")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.mode == "shifted" and not self.shift > 0:
            raise ValueError("shifted mode needs a positive shift")


@dataclass(frozen=True)
class EstimatePoint:
    n: int
    gamma_hat: float
    radicand: float
    accepted: bool


@dataclass
class GammaEstimate:
    value: float
    iterations: int
    history: list[EstimatePoint]
    reason: str
    counters: Counters = field(default_factory=Counters)
    wall_time: float = 0.0

    def estimates(self) -> np.ndarray:
        return np.array([p.gamma_hat for p in self.history])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "gamma_hat", "radicand", "accepted"])
            for p in self.history:
                w.writerow([p.n, repr(p.gamma_hat), repr(p.radicand), str(p.accepted).lower()])

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "iterations": self.iterations,
            "reason": self.reason,
            "counters": self.counters.to_dict(),
            "wall_time": self.wall_time,
        }


def _estimate(op, b, config: EstimatorConfig, shift: float) -> GammaEstimate:
    b = as_vector(b, op.n)
    if not np.any(b):
        b = np.ones(op.n, dtype=np.complex128)
    bnorm = float(np.linalg.norm(b))
    trace = GradientTrace(config.lineage, depth=2)
    history: list[EstimatePoint] = []
    current = None
    hits = 0
    reason = "eta-exhausted"
    steps = 0
    t0 = time.perf_counter()
    with counting("estimate") as scope:
        for state in iterate_gradient(config.lineage, op, b, None, trace):
            steps = state.n
            if steps >= 2:
                d = trace.derived(steps - 1)
                radicand = d.gamma - shift * d.alpha_ra + shift * shift
                if radicand > 0.0:
                    value = math.sqrt(radicand)
                    if current is not None and abs(value - current) <= config.stagnation_tol * value:
                        hits += 1
                    else:
                        hits = 0
                    current = value
                    history.append(EstimatePoint(steps - 1, value, radicand, True))
                else:
                    hits = 0
                    history.append(EstimatePoint(steps - 1, math.nan if current is None else current,
                                                 radicand, False))
                if config.stop_on_stagnation and hits >= config.window:
                    reason = "stagnated"
                    break
            if state.grad_norm <= config.vanish_tol * bnorm:
                reason = "gradient-vanished"
                break
            if steps >= config.eta:
                break
        else:
            reason = "gradient-vanished"
    if current is None:
        if reason == "gradient-vanished" and len(trace) >= 1:
            # single-eigenvalue direction: the Rayleigh quotient is the eigenvalue itself
            lam = 1.0 / trace.lineage_alpha[0] - shift if len(trace) == 1 else None
            if lam is not None and lam > 0:
                current = lam
                history.append(EstimatePoint(0, lam, lam * lam, True))
        if current is None:
            raise EstimationFailed(f"no positive radicand in {steps} iterations")
    est = GammaEstimate(value=current, iterations=steps, history=history, reason=reason)
    est.counters = scope.total.copy()
    est.wall_time = time.perf_counter() - t0
    return est


def estimate_direct(h, b, config: EstimatorConfig | None = None) -> GammaEstimate:
    """Estimate gamma* from sqrt(Gamma_n) of SD/MG steps on ``h x = b``."""
    return _estimate(h, b, config or EstimatorConfig(), 0.0)


def estimate_shifted(m1, gamma: float, b, config: EstimatorConfig | None = None) -> GammaEstimate:
    """Estimate gamma* from SD/MG steps on ``(gamma I + H) x = b``.

    ``m1`` applies ``gamma I + H``. The estimate is
    sqrt(Gamma_n - gamma alpha^RA_n + gamma^2).
    """
    if not gamma >= 0:
        raise ValueError("shift must be nonnegative")
    return _estimate(m1, b, config or EstimatorConfig(mode="shifted", shift=gamma), float(gamma))


def preadapt(split_op: SplitOperator, b, config: EstimatorConfig | None = None) -> GammaEstimate:
    """Estimate the HSS shift for ``A x = b`` from its Hermitian part.

    The estimation right-hand side is ``b`` itself (all ones when ``b = 0``).
    A configured ``gamma_floor`` is applied to the result.
    """
    config = config or EstimatorConfig()
    if config.mode == "direct":
        est = estimate_direct(split_op.h, b, config)
    else:
        est = estimate_shifted(ShiftedOperator(split_op.h, config.shift), config.shift, b, config)
    if config.gamma_floor > 0 and est.value < config.gamma_floor:
        est.value = config.gamma_floor
    return est
