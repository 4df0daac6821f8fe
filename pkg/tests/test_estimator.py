import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gradhss.estimator import (
    EstimationFailed, EstimatorConfig, estimate_direct, estimate_shifted, preadapt,
)
from gradhss.linops import ShiftedOperator, SparseOperator, split
from gradhss.problems import EIGHT_DIAG, Cd3dSpec, SpectrumSpec, cd3d, random_hermitian

from oracles import FROZEN

EIGHT = SparseOperator.diagonal(EIGHT_DIAG)
B_EIGHT = np.array(EIGHT_DIAG, dtype=complex)
FIXED = dict(stop_on_stagnation=False)


@pytest.fixture(scope="module")
def cd3d9():
    return split(cd3d(Cd3dSpec(m=9)))


def spectrum_instance(lo, hi, n=100, seed=1):
    spec = SpectrumSpec(kind="logspace", lo=lo, hi=hi, n=n, shuffle=True, seed=seed)
    h = random_hermitian(n, 0.05, seed, spec)
    ev = np.linalg.eigvalsh(h.toarray())
    return h, math.sqrt(ev[0] * ev[-1])


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(eta=1), dict(stagnation_tol=0.0), dict(window=0), dict(mode="both"),
        dict(mode="shifted", shift=0.0), dict(lineage="CG"),
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            EstimatorConfig(**kwargs)

    def test_lagged_names_map_to_lineage(self):
        assert EstimatorConfig(lineage="bb2").lineage == "MG"


def test_scalar_operator_single_step():
    est = estimate_direct(SparseOperator.diagonal([2.5] * 6), np.arange(1.0, 7.0))
    assert est.value == pytest.approx(2.5)
    assert est.reason == "gradient-vanished" and est.iterations == 1


def test_shift_zero_is_direct_bit_for_bit():
    cfg = EstimatorConfig(eta=60, **FIXED)
    a = estimate_direct(EIGHT, B_EIGHT, cfg)
    b = estimate_shifted(EIGHT, 0.0, B_EIGHT, cfg)
    assert a.value == b.value
    assert [p.gamma_hat for p in a.history] == [p.gamma_hat for p in b.history]


def test_eta_two_coarse_estimate(cd3d9):
    est = preadapt(cd3d9, np.ones(cd3d9.n), EstimatorConfig(eta=2))
    assert est.value > 0 and est.reason == "eta-exhausted" and est.iterations == 2
    assert len(est.history) == 1


def test_zero_rhs_falls_back_to_ones(cd3d9):
    cfg = EstimatorConfig(eta=20, **FIXED)
    assert preadapt(cd3d9, np.zeros(cd3d9.n), cfg).value == \
        preadapt(cd3d9, np.ones(cd3d9.n), cfg).value


def test_gamma_floor_on_large_grid():
    parts = split(cd3d(Cd3dSpec(m=40)))
    assert FROZEN["cd3d40_gamma_star"] < 1
    est = preadapt(parts, np.ones(parts.n), EstimatorConfig(eta=50, gamma_floor=1.0))
    assert est.value == 1.0


def test_nonpositive_radicands_carry_previous_estimate():
    # a huge shift makes the early radicands negative
    h = SparseOperator.diagonal(EIGHT_DIAG)
    est = estimate_shifted(ShiftedOperator(h, 1.0), 1.0, B_EIGHT,
                           EstimatorConfig(mode="shifted", eta=50, **FIXED))
    assert all(p.radicand > 0 for p in est.history if p.accepted)
    for prev, cur in zip(est.history, est.history[1:]):
        if not cur.accepted and not math.isnan(prev.gamma_hat):
            assert cur.gamma_hat == prev.gamma_hat


def test_failure_when_no_valid_radicand():
    # a declared shift strictly inside the operator's spectrum: radicand (1-10)(100-10) < 0
    h = SparseOperator.diagonal([1.0, 100.0])
    with pytest.raises(EstimationFailed):
        estimate_shifted(h, 10.0, np.array([1.0, 1.0]),
                         EstimatorConfig(mode="shifted", shift=10.0, eta=20, **FIXED))


@pytest.mark.parametrize("mode", ["direct", "shifted"])
def test_cd3d_analytic_target(cd3d9, mode):
    est = preadapt(cd3d9, np.ones(cd3d9.n), EstimatorConfig(mode=mode, shift=1.0, eta=300, **FIXED))
    assert est.value == pytest.approx(FROZEN["cd3d9_gamma_star"], rel=0.02)


def test_preadapt_m16_within_five_percent():
    parts = split(cd3d(Cd3dSpec(m=16)))
    est = preadapt(parts, np.ones(parts.n), EstimatorConfig(eta=50, **FIXED))
    assert est.value == pytest.approx(FROZEN["cd3d16_gamma_star"], rel=0.05)


@pytest.mark.parametrize("lo,hi", [(0.64, 1.0), (1.0, 10.0), (1.0, 137.0), (0.5, 50.0)])
@pytest.mark.parametrize("lineage", ["SD", "MG"])
def test_consistency_against_dense_eigensolver(lo, hi, lineage):
    h, gamma_star = spectrum_instance(lo, hi)
    est = estimate_direct(h, np.ones(h.n), EstimatorConfig(lineage=lineage, eta=5000, **FIXED))
    assert est.value == pytest.approx(gamma_star, rel=5e-3)


@pytest.mark.parametrize("lo,hi", [(0.64, 1.0), (1.0, 10.0), (1.0, 137.0), (0.5, 50.0)])
def test_direct_and_shifted_agree_at_stagnation(lo, hi):
    h, _ = spectrum_instance(lo, hi)
    b = np.ones(h.n)
    d = estimate_direct(h, b, EstimatorConfig(eta=5000))
    s = estimate_shifted(ShiftedOperator(h, 1.0), 1.0, b, EstimatorConfig(mode="shifted", eta=5000))
    assert d.reason == s.reason == "stagnated"
    assert s.value == pytest.approx(d.value, rel=0.01)


def test_sd_stagnates_no_later_than_mg():
    # spectra with gamma* near 0.8, 3.1 and 11.7
    wins = 0
    for lo, hi in [(0.64, 1.0), (1.0, 9.61), (1.0, 136.89)]:
        h, _ = spectrum_instance(lo, hi)
        sd = estimate_direct(h, np.ones(h.n), EstimatorConfig("SD", eta=5000))
        mg = estimate_direct(h, np.ones(h.n), EstimatorConfig("MG", eta=5000))
        wins += sd.iterations <= mg.iterations
    assert wins >= 2


@given(st.floats(0.1, 10.0), st.floats(1.5, 50.0), st.integers(0, 1000))
def test_estimate_positive_and_history_nonempty(lam1, ratio, seed):
    vals = np.linspace(lam1, lam1 * ratio, 12)
    h = SparseOperator.diagonal(vals)
    b = np.random.default_rng(seed).uniform(0.5, 1.5, 12)
    est = estimate_direct(h, b, EstimatorConfig(eta=30))
    assert est.value > 0 and est.history
    assert est.reason in ("stagnated", "eta-exhausted", "gradient-vanished")


def test_estimate_csv(tmp_path):
    est = estimate_direct(EIGHT, B_EIGHT, EstimatorConfig(eta=10, **FIXED))
    est.to_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "n,gamma_hat,radicand,accepted"
    assert len(lines) == 1 + len(est.history)
