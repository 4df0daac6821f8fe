"""Test problem generators."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
import scipy.sparse as sp

from .linops import SparseOperator, as_vector

# diag(1, 2, 10, 20, 100, 200, 1000, 2000): kappa = 2000
EIGHT_DIAG = (1.0, 2.0, 10.0, 20.0, 100.0, 200.0, 1000.0, 2000.0)


@dataclass(frozen=True)
class Cd3dSpec:
    """Centered-difference convection-diffusion on the unit cube, ``m^3`` unknowns."""

    m: int
    theta: float = 1.0
    scaling: str = "h2"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.scaling not in ("h2", "none"):
            raise ValueError("scaling must be 'h2' or 'none'")

    @property
    def n(self) -> int:
        return self.m ** 3

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)

    def hermitian_extremes(self) -> tuple[float, float]:
        """Closed-form extreme eigenvalues of the Hermitian part (7-point Laplacian)."""
        c = math.cos(math.pi * self.h)
        lo, hi = 6.0 - 6.0 * c, 6.0 + 6.0 * c
        if self.scaling == "none":
            lo, hi = lo / self.h ** 2, hi / self.h ** 2
        return lo, hi

    def gamma_star(self) -> float:
        lo, hi = self.hermitian_extremes()
        return math.sqrt(lo * hi)


def cd3d(spec: Cd3dSpec) -> SparseOperator:
    """Assemble the 7-point convection-diffusion matrix, x index fastest.

    With ``h2`` scaling the stencil is 6 on the diagonal, ``-1 - theta h/2``
    for the lower neighbour and ``-1 + theta h/2`` for the upper neighbour on
    every axis.
    """
    m, h = spec.m, spec.h
    c = spec.theta * h / 2.0
    t = sp.diags_array([np.full(m - 1, -1.0 - c), np.full(m, 2.0), np.full(m - 1, -1.0 + c)],
                       offsets=[-1, 0, 1], format="csr")
    eye = sp.identity(m, format="csr")
    a = (sp.kron(eye, sp.kron(eye, t)) + sp.kron(eye, sp.kron(t, eye))
         + sp.kron(t, sp.kron(eye, eye)))
    if spec.scaling == "none":
        a = a / h ** 2
    a = sp.csr_array(a, dtype=np.complex128)
    a.eliminate_zeros()  # kron keeps the zero fill of its block format
    return SparseOperator(a)


@dataclass(frozen=True)
class SpectrumSpec:
    """Prescribed positive spectrum: an explicit ascending list or a log-spaced range."""

    kind: str = "explicit"
    values: tuple[float, ...] = ()
    lo: float = 1e-3
    hi: float = 1.0
    n: int = 1000
    shuffle: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("explicit", "logspace"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.kind == "explicit":
            v = np.asarray(self.values, dtype=float)
            if v.size == 0 or not np.all(np.isfinite(v)) or np.any(v <= 0):
                raise ValueError("spectrum values must be positive and finite")
            if np.any(np.diff(v) < 0):
                raise ValueError("explicit spectrum must be sorted ascending")
        elif not (self.lo > 0 and self.hi >= self.lo and self.n >= 1):
            raise ValueError("logspace needs 0 < lo <= hi and n >= 1")

    def eigenvalues(self) -> np.ndarray:
        """Sorted ascending eigenvalues."""
        if self.kind == "explicit":
            return np.asarray(self.values, dtype=float)
        if self.n == 1:
            return np.array([self.lo])
        vals = np.logspace(math.log10(self.lo), math.log10(self.hi), self.n)
        vals[0], vals[-1] = self.lo, self.hi
        return vals

    def diagonal(self) -> np.ndarray:
        """Values in matrix order (shuffled when requested)."""
        vals = self.eigenvalues()
        if self.shuffle:
            vals = np.random.default_rng(self.seed).permutation(vals)
        return vals

    def gamma_star(self) -> float:
        vals = self.eigenvalues()
        return math.sqrt(vals[0] * vals[-1])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["values"] = list(self.values)
        return d


def diag_matrix(spec: SpectrumSpec) -> SparseOperator:
    return SparseOperator.diagonal(spec.diagonal())


def random_hermitian(n: int, density: float = 0.01, seed: int = 0,
                     spectrum: SpectrumSpec | None = None,
                     rotations: int | None = None) -> SparseOperator:
    """Seeded sparse Hermitian positive definite matrix.

    With ``spectrum`` the result is ``Q diag(spectrum) Q^H`` where Q is a
    product of ``rotations`` random complex Givens rotations (default
    ``round(density * n)``), so the eigenvalues are known exactly. Without it,
    a random sparse matrix is symmetrized and shifted to strict diagonal
    dominance.
    """
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    if spectrum is not None:
        vals = spectrum.diagonal()
        if vals.size != n:
            raise ValueError(f"spectrum has {vals.size} values, expected {n}")
        m = sp.diags_array(vals.astype(np.complex128), format="csr")
        k = int(round(density * n)) if rotations is None else int(rotations)
        for _ in range(k):
            p, q = rng.choice(n, size=2, replace=False)
            angle = rng.uniform(0, 2 * np.pi)
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
            c, s = math.cos(angle), math.sin(angle) * phase
            g = sp.identity(n, dtype=np.complex128, format="lil")
            g[p, p] = c
            g[q, q] = c
            g[p, q] = -np.conj(s)
            g[q, p] = s
            g = g.tocsr()
            m = (g @ m @ g.conj().T).tocsr()
        m = (m + m.conj().T) * 0.5
        return SparseOperator(m, "hermitian")
    r = sp.random_array((n, n), density=density, rng=rng, dtype=np.float64, format="csr")
    ri = sp.random_array((n, n), density=density, rng=rng, dtype=np.float64, format="csr")
    r = r + 1j * ri
    m = (r + r.conj().T) * 0.5
    rowsum = np.asarray(abs(m).sum(axis=1)).ravel()
    m = m + sp.diags_array(rowsum + 1.0, format="csr")
    return SparseOperator(sp.csr_array(m), "hermitian")


def make_rhs(kind: str, n: int, lo: float = -10.0, hi: float = 10.0, seed: int = 0,
             operator=None, solution=None) -> np.ndarray:
    """Right-hand side: ``ones``, ``complex-uniform`` or ``from-solution`` (operator @ solution)."""
    if kind == "ones":
        return np.ones(n, dtype=np.complex128)
    if kind == "complex-uniform":
        rng = np.random.default_rng(seed)
        return rng.uniform(lo, hi, n) + 1j * rng.uniform(lo, hi, n)
    if kind == "from-solution":
        if operator is None or solution is None:
            raise ValueError("from-solution needs operator and solution")
        return operator.matrix @ as_vector(solution, n)
    raise ValueError(f"unknown right-hand side kind {kind!r}")
