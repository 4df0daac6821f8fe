"""Solver reports shared by the gradient, inner, HSS and Krylov solvers."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum

from .linops import Counters


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max-iters"
    BREAKDOWN = "breakdown"

    def __str__(self) -> str:
        return self.value


@dataclass
class SolveReport:
    """Outcome of one iterative solve.

    ``counters`` covers the recurrence core only, so dividing by ``iterations``
    gives the per-iteration cost; set-up and residual checks land in
    ``aux_counters``. ``per_iteration`` holds core counters of each iteration
    and is filled by solvers whose cost varies with the iteration index.
    """

    method: str
    iterations: int = 0
    rel_residual: float = math.nan
    history: list[float] = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)
    aux_counters: Counters = field(default_factory=Counters)
    per_iteration: list[Counters] | None = None
    wall_time: float = 0.0
    status: Status = Status.MAX_ITERS
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "iterations": self.iterations,
            "rel_residual": self.rel_residual,
            "status": str(self.status),
            "wall_time": self.wall_time,
            "counters": self.counters.to_dict(),
            "aux_counters": self.aux_counters.to_dict(),
            "history": list(self.history),
        }
        if self.per_iteration is not None:
            out["per_iteration"] = [c.to_dict() for c in self.per_iteration]
        if self.message:
            out["message"] = self.message
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        per = d.get("per_iteration")
        return cls(
            method=d["method"],
            iterations=int(d["iterations"]),
            rel_residual=float(d["rel_residual"]),
            history=[float(v) for v in d.get("history", [])],
            counters=Counters(**d["counters"]),
            aux_counters=Counters(**d.get("aux_counters", {})),
            per_iteration=None if per is None else [Counters(**c) for c in per],
            wall_time=float(d.get("wall_time", 0.0)),
            status=Status(d["status"]),
            message=d.get("message", ""),
        )

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def history_csv(self, path) -> None:
        write_history_csv(path, self.history)


def write_history_csv(path, history) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "rel_residual"])
        for i, r in enumerate(history):
            w.writerow([i, repr(float(r))])
