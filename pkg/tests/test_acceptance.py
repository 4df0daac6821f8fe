"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints a ``[PASS]`` or ``[FAIL]`` line; the lines are repeated in
the pytest terminal summary. Run directly with ``pytest tests/test_acceptance.py -v``.
"""
import math
import statistics
import time

import numpy as np
import pytest

from gradhss.bench.audit import audit_counters
from gradhss.estimator import EstimatorConfig, estimate_direct, estimate_shifted
from gradhss.graditer import GradientTrace, iterate_gradient
from gradhss.hss import (
    HssConfig, contraction_bound, hss_solve, iteration_matrix_dense, pahss_solve,
)
from gradhss.inner import InnerConfig, bb_solve, cg_solve, cgne_solve
from gradhss.krylov import orthodir_solve
from gradhss.linops import ShiftedOperator, SparseOperator, realify, split
from gradhss.problems import (
    EIGHT_DIAG, Cd3dSpec, SpectrumSpec, cd3d, diag_matrix, make_rhs,
)

from conftest import ACCEPTANCE_LINES, random_hpd

EIGHT = SparseOperator.diagonal(EIGHT_DIAG)
B_EIGHT = np.array(EIGHT_DIAG, dtype=complex)  # H times the all-ones vector
ROOT2000 = math.sqrt(2000)


def verdict(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def sd_run(h, b, steps):
    trace = GradientTrace("SD")
    for state in iterate_gradient("SD", h, b, None, trace):
        if state.n >= steps:
            break
    return trace


def test_01_asymptotic_limits():
    t0 = time.perf_counter()
    trace = sd_run(EIGHT, B_EIGHT, 500)
    d = trace.derived(len(trace) - 1)
    elapsed = time.perf_counter() - t0
    errs = {
        "alpha_A": abs(d.alpha_a - 1 / 2001) * 2001,
        "Gamma": abs(d.gamma - 2000) / 2000,
        "alpha_Y": abs(d.alpha_y - 1 / 2000) * 2000 if d.alpha_y is not None else math.inf,
        "alpha_Z": abs(d.alpha_z - 1) if d.alpha_z is not None else math.inf,
    }
    tols = {"alpha_A": 1e-4, "Gamma": 1e-3, "alpha_Y": 1e-3, "alpha_Z": 1e-3}
    bad = [k for k in errs if not errs[k] <= tols[k]]
    ok = not bad and elapsed < 1.0
    detail = ", ".join(f"{k} err {errs[k]:.2e} (tol {tols[k]:.0e})" for k in errs)
    verdict(1, ok, f"{detail}; {elapsed:.2f}s" + (f"; out of tolerance: {bad}" if bad else ""))


def test_02_q_identities():
    h = SparseOperator.from_dense(random_hpd(50, 2024, 100.0), "hermitian")
    b = make_rhs("complex-uniform", 50, seed=7)
    trace = sd_run(h, b, 100)
    worst = 0.0
    for n in range(1, len(trace)):
        d = trace.derived(n)
        a0, a1 = trace.steplength(n - 1), trace.steplength(n)
        ratio = trace.norm(n) ** 2 / trace.norm(n - 1) ** 2
        for got, want in ((d.q(a0), -ratio), (d.q(a1), -ratio * a1 ** 2 / a0 ** 2)):
            worst = max(worst, abs(got - want) / abs(want))
    verdict(2, worst <= 1e-10, f"{len(trace) - 1} iterations, worst relative error {worst:.2e}")


def test_03_realified_embedding():
    h = SparseOperator.from_dense(random_hpd(40, 40, 500.0), "hermitian")
    b = make_rhs("complex-uniform", 40, seed=40)
    big, vec = realify(h, b)
    real_op = SparseOperator(big, "hermitian")
    a = sd_run(h, b, 50)
    r = sd_run(real_op, vec, 50)
    sa = np.array([a.steplength(n) for n in range(50)])
    sr = np.array([r.steplength(n) for n in range(50)])
    worst = float(np.max(np.abs(sa - sr) / np.abs(sr)))
    verdict(3, worst <= 1e-12, f"50 steplengths, worst relative difference {worst:.2e}")


def _first_within(est, target, tol):
    for p in est.history:
        if p.accepted and abs(p.gamma_hat - target) / target <= tol:
            return p.n
    return None


def test_04_estimator_modes():
    results = {}
    for lineage in ("SD", "MG"):
        for mode in ("direct", "shifted"):
            cfg = EstimatorConfig(lineage=lineage, mode=mode, shift=1.0, eta=5000,
                                  stop_on_stagnation=False)
            if mode == "direct":
                est = estimate_direct(EIGHT, B_EIGHT, cfg)
            else:
                est = estimate_shifted(ShiftedOperator(EIGHT, 1.0), 1.0, B_EIGHT, cfg)
            reach = _first_within(est, ROOT2000, 5e-3)
            final = abs(est.value - ROOT2000) / ROOT2000
            results[f"{lineage}-{mode}"] = (reach, final)
    ok = all(r is not None and r <= 5000 and f <= 5e-3 for r, f in results.values())
    sd_reach = results["SD-direct"][0]
    sd_ok = sd_reach is not None and sd_reach <= 500
    detail = ", ".join(f"{k} reaches 0.5% at n={r} (final {f:.1e})" for k, (r, f) in results.items())
    verdict(4, ok and sd_ok, detail + f"; SD within 500: {sd_ok}")


def test_05_cd3d_oracle():
    spec = Cd3dSpec(m=9)
    parts = split(cd3d(spec))
    ev = np.linalg.eigvalsh(parts.h.toarray())
    c = math.cos(math.pi / 10)
    eig_err = max(abs(ev[0] - (6 - 6 * c)), abs(ev[-1] - (6 + 6 * c)))
    est = estimate_direct(parts.h, np.ones(parts.n), EstimatorConfig(eta=300, stop_on_stagnation=False))
    target = 6 * math.sin(math.pi / 10)
    rel = abs(est.value - target) / target
    verdict(5, eig_err <= 1e-10 and rel <= 0.02,
            f"eigenvalue error {eig_err:.1e}, estimate {est.value:.5f} vs {target:.5f} ({rel:.2%})")


def test_06_bound():
    spec = Cd3dSpec(m=3)
    parts = split(cd3d(spec))
    lo, hi = spec.hermitian_extremes()
    star = math.sqrt(lo * hi)
    parts_ok, notes = True, []
    for g in (star / 2, star, 2 * star):
        _, rho = iteration_matrix_dense(parts, g)
        bound = contraction_bound(lo, hi, g)
        parts_ok &= rho < 1 and rho <= bound + 1e-12
        notes.append(f"rho {rho:.4f} <= {bound:.4f}")
    b22 = contraction_bound(1.0, 2000.0, ROOT2000)
    ok = parts_ok and abs(b22 - 0.95626) <= 1e-5
    verdict(6, ok, "; ".join(notes) + f"; bound at gamma* on the eight-value spectrum {b22:.6f}")


def test_07_end_to_end():
    t0 = time.perf_counter()
    parts = split(cd3d(Cd3dSpec(m=16)))
    b = make_rhs("complex-uniform", parts.n, seed=0)
    cfg = HssConfig(tol=1e-6, inner1=InnerConfig("CG", 1e-4), inner2=InnerConfig("CGNE", 1e-4))
    x, rep = pahss_solve(parts, b, EstimatorConfig(eta=50, stop_on_stagnation=False), cfg)
    resid = float(np.linalg.norm(b - parts.a.toarray() @ x) / np.linalg.norm(b)) \
        if parts.n <= 5000 else math.nan
    elapsed = time.perf_counter() - t0
    ok = rep.converged and resid <= 1e-6 and elapsed < 60
    verdict(7, ok, f"gamma_hat {rep.gamma:.4f}, {rep.outer_iterations} outer, "
                   f"recomputed residual {resid:.2e}, {elapsed:.1f}s")


def test_08_eta_trend():
    parts = split(cd3d(Cd3dSpec(m=16)))
    cfg = HssConfig(tol=1e-6, inner1=InnerConfig("CG", 1e-4), inner2=InnerConfig("CGNE", 1e-4))
    medians = {}
    for eta in (5, 50, 100):
        outer = []
        for seed in range(5):
            b = make_rhs("complex-uniform", parts.n, seed=seed)
            _, rep = pahss_solve(parts, b, EstimatorConfig(eta=eta, stop_on_stagnation=False), cfg)
            outer.append(rep.outer_iterations if rep.converged else math.inf)
        medians[eta] = statistics.median(outer)
    ok = medians[50] <= medians[5] + 2 and abs(medians[100] - medians[50]) <= 2
    verdict(8, ok, f"median outer iterations: eta=5 {medians[5]}, eta=50 {medians[50]}, "
                   f"eta=100 {medians[100]}")


def test_09_low_precision_bb():
    op = diag_matrix(SpectrumSpec(kind="logspace", lo=1e-3, hi=1.0, n=1000))
    b = np.ones(1000)
    mv = {}
    for eps in (1e-1, 1e-8):
        _, cg = cg_solve(op, b, tol=eps)
        _, bb = bb_solve(op, b, tol=eps)
        assert cg.converged and bb.converged
        mv[eps] = (cg.counters.matvecs, bb.counters.matvecs)
    ok = mv[1e-1][1] <= 3 * mv[1e-1][0] and mv[1e-8][0] <= mv[1e-8][1]
    verdict(9, ok, f"eps=1e-1 CG {mv[1e-1][0]} vs BB {mv[1e-1][1]} matvecs; "
                   f"eps=1e-8 CG {mv[1e-8][0]} vs BB {mv[1e-8][1]}")


def test_10_counter_audit():
    parts = split(cd3d(Cd3dSpec(m=9)))
    b = make_rhs("complex-uniform", parts.n, seed=1)
    runs = {
        "CG": cg_solve(parts.h, b, tol=1e-8)[1],
        "BB": bb_solve(parts.h, b, tol=1e-8)[1],
        "CGNE": cgne_solve(1.0, parts.s, b, tol=1e-8)[1],
        "ORTHODIR": orthodir_solve(parts.a, b, tol=1e-8)[1],
    }
    results = {m: (r.converged, audit_counters(r, m).passed, r.iterations) for m, r in runs.items()}
    ok = all(c and p for c, p, _ in results.values())
    verdict(10, ok, ", ".join(f"{m} {'exact' if p else 'MISMATCH'} over {k} iterations"
                              for m, (_, p, k) in results.items()))


def test_11_table_shape():
    parts = split(cd3d(Cd3dSpec(m=40)))
    b = make_rhs("complex-uniform", parts.n, seed=0)
    reports = {inner: hss_solve(parts, b, HssConfig.race_preset(inner))[1] for inner in ("CG", "BB")}
    _, orth = orthodir_solve(parts.a, b, tol=1e-6)
    total = {k: sum(r.total_inner) for k, r in reports.items()}
    ok = (all(r.converged for r in reports.values()) and total["BB"] >= total["CG"]
          and orth.converged and 40 <= orth.iterations <= 160
          and min(total.values()) > orth.iterations)
    verdict(11, ok, f"HSS-CG {reports['CG'].outer_iterations} outer / {total['CG']} inner, "
                    f"HSS-BB {reports['BB'].outer_iterations} outer / {total['BB']} inner, "
                    f"ORTHODIR {orth.iterations}")


def test_12_gamma_valley():
    parts = split(cd3d(Cd3dSpec(m=9)))
    b = make_rhs("complex-uniform", parts.n, seed=0)
    grid = [0.5 + 0.25 * k for k in range(13)]
    outer = {}
    for g in grid:
        _, rep = hss_solve(parts, b, HssConfig(gamma=g))
        outer[g] = rep.outer_iterations if rep.converged else math.inf
    best = min(grid, key=lambda g: (outer[g], abs(g - 1.854)))
    verdict(12, abs(best - 1.854) <= 0.75,
            f"argmin gamma {best} ({outer[best]} outer iterations), analytic 1.854")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
