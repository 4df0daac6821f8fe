import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from gradhss.bench.audit import audit_counters
from gradhss.inner import InnerConfig, bb_solve, cg_solve, cgne_solve, direct_solve, solve_hermitian
from gradhss.linops import SparseOperator, split
from gradhss.problems import EIGHT_DIAG, Cd3dSpec, SpectrumSpec, cd3d, diag_matrix
from gradhss.reports import Status

from conftest import random_hpd
from oracles import cg_reference_iterations

EIGHT = SparseOperator.diagonal(EIGHT_DIAG)


def random_skew(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    z = scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return SparseOperator.from_dense((z - z.conj().T) / 2, "skew")


@pytest.fixture(scope="module")
def logspace():
    return diag_matrix(SpectrumSpec(kind="logspace", lo=1e-3, hi=1.0, n=1000)), np.ones(1000)


class TestConfig:
    @pytest.mark.parametrize("kwargs", [dict(method="GMRES"), dict(tol=0.0), dict(tol=1.0),
                                        dict(max_iter=0)])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            InnerConfig(**kwargs)


@pytest.mark.parametrize("solver", [cg_solve, bb_solve])
def test_identity_one_iteration(solver):
    x, rep = solver(SparseOperator.identity(7), np.arange(1.0, 8.0))
    assert rep.iterations == 1 and rep.converged
    np.testing.assert_allclose(x, np.arange(1.0, 8.0))


@given(st.lists(st.floats(1.0, 10.0), min_size=1, max_size=8, unique=True), st.integers(1, 6),
       st.integers(0, 1000))
def test_cg_finite_termination(values, copies, seed):
    values = sorted(values)
    if min(np.diff(values), default=1.0) < 0.05:
        return
    diag = np.repeat(values, copies)
    op = SparseOperator.diagonal(diag)
    b = np.random.default_rng(seed).uniform(0.5, 1.5, diag.size)
    x, rep = cg_solve(op, b, tol=1e-12)
    assert rep.converged and rep.iterations <= len(values)
    np.testing.assert_allclose(x, b / diag, rtol=1e-9)


def test_cg_eight_distinct_exact_vs_double():
    b = np.random.default_rng(0).standard_normal(8)
    # exact-arithmetic claim, checked in 60-digit arithmetic
    assert cg_reference_iterations(EIGHT_DIAG, b, 1e-12) <= 8
    # double precision loses orthogonality at condition 2000 and needs a few more steps
    x, rep = cg_solve(EIGHT, b, tol=1e-12)
    assert rep.converged and rep.iterations <= 8 + 4
    np.testing.assert_allclose(x, direct_solve(EIGHT, b), rtol=1e-10)


def test_cg_breakdown_on_indefinite():
    _, rep = cg_solve(SparseOperator.diagonal([1.0, -1.0]), np.array([1.0, 1.0]))
    assert rep.status is Status.BREAKDOWN


def test_cgne_small_example():
    s = SparseOperator.from_dense([[0, 0.5], [-0.5, 0]], "skew")
    x, rep = cgne_solve(1.0, s, np.array([1.0, 0.0]), tol=1e-12)
    np.testing.assert_allclose(x, [0.8, 0.4], atol=1e-12)
    assert rep.counters.as_tuple() == (2 * rep.iterations, 3 * rep.iterations, 2 * rep.iterations)


def test_cgne_zero_skew():
    s = SparseOperator.from_dense(np.zeros((4, 4)), "skew")
    x, rep = cgne_solve(2.0, s, np.arange(4.0) + 1)
    assert rep.iterations == 1
    np.testing.assert_allclose(x, (np.arange(4.0) + 1) / 2)


@pytest.mark.parametrize("case", range(20))
def test_cgne_matches_direct(case):
    rng = np.random.default_rng(case)
    n = int(rng.integers(2, 101))
    gamma = float(rng.uniform(0.05, 5.0))
    s = random_skew(n, case, scale=float(rng.uniform(0.1, 3.0)))
    rhs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x, rep = cgne_solve(gamma, s, rhs, tol=1e-10)
    ref = direct_solve(gamma * np.eye(n) + s.toarray(), rhs)
    assert rep.converged
    assert np.linalg.norm(x - ref) <= 1e-8 * np.linalg.norm(ref)


def test_cgne_cd3d_skew_part():
    parts = split(cd3d(Cd3dSpec(m=9)))
    rhs = np.random.default_rng(2).uniform(-10, 10, parts.n) + 0j
    x, rep = cgne_solve(1.0, parts.s, rhs, tol=1e-4)
    assert rep.converged
    resid = rhs - (x + parts.s.toarray() @ x)
    assert np.linalg.norm(resid) <= 1e-4 * np.linalg.norm(rhs)


def test_direct_solve_examples(hpd_factory):
    assert np.allclose(direct_solve(SparseOperator.identity(3), [1, 2, 3]), [1, 2, 3])
    np.testing.assert_allclose(direct_solve(EIGHT, np.array(EIGHT_DIAG)), np.ones(8))
    op = hpd_factory(50, seed=4)
    rhs = np.random.default_rng(1).standard_normal(50)
    x = direct_solve(op, rhs)
    assert np.linalg.norm(op.toarray() @ x - rhs) <= 1e-12 * np.linalg.norm(rhs)
    with pytest.raises(np.linalg.LinAlgError):
        direct_solve(np.ones((3, 3)), np.ones(3))


@pytest.mark.parametrize("method", ["CG", "BB"])
@given(seed=st.integers(0, 10_000), n=st.integers(5, 60))
def test_counter_audit(method, seed, n):
    op = SparseOperator.from_dense(random_hpd(n, seed, 30.0), "hermitian")
    b = np.random.default_rng(seed).standard_normal(n)
    solver = cg_solve if method == "CG" else bb_solve
    _, rep = solver(op, b, tol=1e-8)
    assert rep.converged
    assert audit_counters(rep, method).passed


@given(seed=st.integers(0, 10_000), n=st.integers(2, 60), gamma=st.floats(0.1, 4.0))
def test_cgne_counter_audit(seed, n, gamma):
    s = random_skew(n, seed)
    rhs = np.random.default_rng(seed).standard_normal(n)
    _, rep = cgne_solve(gamma, s, rhs, tol=1e-8)
    assert rep.converged and audit_counters(rep, "CGNE").passed


def test_audit_rejects_wrong_counts():
    _, rep = bb_solve(EIGHT, np.ones(8), tol=1e-6)
    rep.counters.updates += rep.iterations
    assert not audit_counters(rep, "BB").passed
    with pytest.raises(ValueError):
        audit_counters(rep, "GMRES")


def test_low_precision_crossover(logspace):
    op, b = logspace
    _, cg_lo = cg_solve(op, b, tol=1e-1)
    _, bb_lo = bb_solve(op, b, tol=1e-1)
    _, cg_hi = cg_solve(op, b, tol=1e-8)
    _, bb_hi = bb_solve(op, b, tol=1e-8)
    assert all(r.converged for r in (cg_lo, bb_lo, cg_hi, bb_hi))
    assert bb_lo.counters.matvecs <= 3 * cg_lo.counters.matvecs
    assert cg_hi.counters.matvecs <= bb_hi.counters.matvecs


def test_dispatch_and_warm_start():
    b = np.ones(8)
    exact = np.ones(8) / np.array(EIGHT_DIAG)
    x, rep = solve_hermitian(EIGHT, b, exact, InnerConfig("CG", 1e-6, warm_start=True))
    assert rep.iterations == 0
    _, rep = solve_hermitian(EIGHT, b, exact, InnerConfig("CG", 1e-6, warm_start=False))
    assert rep.iterations > 0
    x, rep = solve_hermitian(EIGHT, b, None, InnerConfig("DIRECT"))
    np.testing.assert_allclose(x, exact)
    with pytest.raises(ValueError):
        solve_hermitian(EIGHT, b, None, InnerConfig("CGNE"))


def test_dense_oracle_agrees_with_scipy(hpd_factory):
    op = hpd_factory(30, seed=9)
    b = np.arange(30.0)
    np.testing.assert_allclose(direct_solve(op, b), scipy.linalg.solve(op.toarray(), b))
