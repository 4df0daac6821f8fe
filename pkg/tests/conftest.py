import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gradhss.linops import SparseOperator

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def random_hpd(n: int, seed: int, cond: float = 100.0, complex_: bool = True) -> np.ndarray:
    """Dense HPD matrix with eigenvalues log-spaced in [1, cond]."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n))
    if complex_:
        z = z + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(z)
    lam = np.logspace(0, np.log10(cond), n)
    a = (q * lam) @ q.conj().T
    return (a + a.conj().T) / 2


@pytest.fixture
def hpd_factory():
    def make(n, seed=0, cond=100.0, complex_=True):
        return SparseOperator.from_dense(random_hpd(n, seed, cond, complex_), "hermitian")
    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
