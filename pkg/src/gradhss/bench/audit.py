"""Per-iteration operation counts checked against the reference cost table."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..reports import SolveReport

# (dot products, vector updates, matrix-vector products) per iteration
TABLE = {
    "CG": (2, 3, 1),
    "BB": (2, 2, 1),
    "CGNE": (2, 3, 2),
}


def orthodir_row(i: int) -> tuple[int, int, int]:
    """Cost of ORTHODIR iteration i (1-based)."""
    return (i + 2, 2 * i + 2, 1)


@dataclass
class AuditResult:
    method: str
    passed: bool
    lines: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def audit_counters(report: SolveReport, method: str | None = None) -> AuditResult:
    method = (method or report.method).upper()
    if method == "ORTHODIR":
        if not report.per_iteration:
            return AuditResult(method, False, ["no per-iteration counters recorded"])
        lines, ok = [], True
        for i, c in enumerate(report.per_iteration, start=1):
            want = orthodir_row(i)
            good = c.as_tuple() == want
            ok &= good
            if not good:
                lines.append(f"iteration {i}: got {c.as_tuple()}, expected {want}")
        lines.append(f"{len(report.per_iteration)} iterations checked")
        return AuditResult(method, ok, lines)
    if method not in TABLE:
        raise ValueError(f"no cost row for method {method!r}")
    want = TABLE[method]
    k = report.iterations
    got = report.counters.as_tuple()
    expected = tuple(k * w for w in want)
    if k == 0:
        return AuditResult(method, got == (0, 0, 0), ["no iterations"])
    per = tuple(g / k for g in got)
    ok = got == expected
    return AuditResult(method, ok, [f"{k} iterations, per iteration {per}, expected {want}"])
