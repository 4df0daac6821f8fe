"""Complex vector arithmetic, CSR operators and the Hermitian/skew-Hermitian split.

Vectors are plain 1-D ``complex128`` numpy arrays. Every arithmetic helper in
this module reports to the active :class:`CountingScope`, which is how solver
reports audit their per-iteration cost (dot products, vector updates,
matrix-vector products).
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

__all__ = [
    "DimensionError",
    "Counters",
    "CountingScope",
    "counting",
    "auxiliary",
    "current_scope",
    "as_vector",
    "dot",
    "norm",
    "axpy",
    "scale_add",
    "SparseOperator",
    "SplitOperator",
    "ShiftedOperator",
    "split",
    "realify",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]


class DimensionError(ValueError):
    """Raised when operand shapes do not agree."""


# ---------------------------------------------------------------------------
# operation counting


@dataclass
class Counters:
    dots: int = 0
    updates: int = 0
    matvecs: int = 0

    def copy(self) -> "Counters":
        return Counters(self.dots, self.updates, self.matvecs)

    def __add__(self, other: "Counters") -> "Counters":
        return Counters(self.dots + other.dots, self.updates + other.updates,
                        self.matvecs + other.matvecs)

    def __sub__(self, other: "Counters") -> "Counters":
        return Counters(self.dots - other.dots, self.updates - other.updates,
                        self.matvecs - other.matvecs)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.dots, self.updates, self.matvecs)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CountingScope:
    """Operation tallies for one solver run.

    ``core`` holds the work of the iteration recurrences proper; ``aux`` holds
    set-up work and residual checks that sit outside the recurrence (initial
    residual, periodic true-residual recomputation, convergence confirmation).
    Increments propagate to every enclosing scope.
    """

    name: str = ""
    parent: "CountingScope | None" = None
    core: Counters = field(default_factory=Counters)
    aux: Counters = field(default_factory=Counters)

    @property
    def total(self) -> Counters:
        return self.core + self.aux

    def _bump(self, attr: str, k: int, aux: bool) -> None:
        scope = self
        while scope is not None:
            bucket = scope.aux if aux else scope.core
            setattr(bucket, attr, getattr(bucket, attr) + k)
            scope = scope.parent


_SCOPE: contextvars.ContextVar[CountingScope | None] = contextvars.ContextVar(
    "gradhss_scope", default=None)
_AUX: contextvars.ContextVar[bool] = contextvars.ContextVar("gradhss_aux", default=False)


def current_scope() -> CountingScope | None:
    return _SCOPE.get()


@contextlib.contextmanager
def counting(name: str = ""):
    """Open a counting scope nested inside the active one (if any)."""
    scope = CountingScope(name=name, parent=_SCOPE.get())
    token = _SCOPE.set(scope)
    aux_token = _AUX.set(False)
    try:
        yield scope
    finally:
        _AUX.reset(aux_token)
        _SCOPE.reset(token)


@contextlib.contextmanager
def auxiliary():
    """Route counts inside the block to the ``aux`` bucket."""
    token = _AUX.set(True)
    try:
        yield
    finally:
        _AUX.reset(token)


def _count(attr: str, k: int = 1) -> None:
    scope = _SCOPE.get()
    if scope is not None:
        scope._bump(attr, k, _AUX.get())


# ---------------------------------------------------------------------------
# vectors


def as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"expected length {n}, got {v.shape[0]}")
    return v


def _check_pair(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise DimensionError(f"length mismatch: {u.shape} vs {v.shape}")


def dot(u: np.ndarray, v: np.ndarray) -> complex:
    """Inner product, conjugate-linear in ``u``: sum(conj(u_i) * v_i)."""
    _check_pair(u, v)
    _count("dots")
    return complex(np.vdot(u, v))


def norm(v: np.ndarray) -> float:
    """Euclidean norm; counted as one dot product."""
    _count("dots")
    return float(np.linalg.norm(v))


def axpy(alpha: complex, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return ``alpha * u + v`` (one vector update)."""
    _check_pair(u, v)
    _count("updates")
    return alpha * u + v


def scale_add(v: np.ndarray, beta: complex, u: np.ndarray) -> np.ndarray:
    """Return ``v + beta * u`` (one vector update); argument order suits CG's p-update."""
    _check_pair(u, v)
    _count("updates")
    return v + beta * u


# ---------------------------------------------------------------------------
# operators


class SparseOperator:
    """Square complex CSR matrix with counted ``apply`` / ``adjoint_apply``.

    ``structure`` may be ``"hermitian"`` or ``"skew"``; the adjoint is then
    obtained from the stored matrix itself instead of a second copy.
    Treat instances as immutable.
    """

    __slots__ = ("_mat", "structure", "_adj")

    def __init__(self, matrix, structure: str | None = None):
        mat = sp.csr_array(matrix, dtype=np.complex128)
        if mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"operator must be square, got {mat.shape}")
        mat.sum_duplicates()
        mat.sort_indices()
        if structure not in (None, "hermitian", "skew"):
            raise ValueError(f"unknown structure {structure!r}")
        self._mat = mat
        self.structure = structure
        self._adj = None

    # construction helpers
    @classmethod
    def from_dense(cls, a, structure: str | None = None) -> "SparseOperator":
        return cls(sp.csr_array(np.asarray(a, dtype=np.complex128)), structure)

    @classmethod
    def identity(cls, n: int) -> "SparseOperator":
        return cls(sp.identity(n, dtype=np.complex128, format="csr"), "hermitian")

    @classmethod
    def diagonal(cls, values) -> "SparseOperator":
        vals = np.asarray(values, dtype=np.complex128)
        structure = "hermitian" if np.all(vals.imag == 0) else None
        return cls(sp.diags_array(vals, format="csr"), structure)

    @property
    def n(self) -> int:
        return self._mat.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._mat.shape

    @property
    def indptr(self) -> np.ndarray:
        return self._mat.indptr

    @property
    def indices(self) -> np.ndarray:
        return self._mat.indices

    @property
    def data(self) -> np.ndarray:
        return self._mat.data

    @property
    def matrix(self) -> sp.csr_array:
        return self._mat

    @property
    def nnz(self) -> int:
        return self._mat.nnz

    def toarray(self) -> np.ndarray:
        return self._mat.toarray()

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._mat.data))) if self._mat.nnz else 0.0

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.n,):
            raise DimensionError(f"operator of size {self.n} applied to shape {x.shape}")
        _count("matvecs")
        return self._mat @ x

    __matmul__ = apply

    def adjoint_apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.n,):
            raise DimensionError(f"operator of size {self.n} applied to shape {x.shape}")
        if self.structure == "hermitian":
            return self.apply(x)
        if self.structure == "skew":
            return -self.apply(x)
        if self._adj is None:
            self._adj = self._mat.conj().T.tocsr()
        _count("matvecs")
        return self._adj @ x

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self._mat.conj().T.tocsr(), self.structure)

    def __repr__(self) -> str:
        tag = f", {self.structure}" if self.structure else ""
        return f"SparseOperator(n={self.n}, nnz={self.nnz}{tag})"


@dataclass(frozen=True)
class SplitOperator:
    a: SparseOperator
    h: SparseOperator
    s: SparseOperator

    @property
    def n(self) -> int:
        return self.a.n


def split(a: SparseOperator) -> SplitOperator:
    """Materialize H = (A + A^H)/2 and S = (A - A^H)/2.

    Both parts share the symmetrized sparsity pattern of ``a``; explicit zeros
    are kept so the pattern does not depend on the values.
    """
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"cannot split non-square operator {a.shape}")
    m = a.matrix.tocoo()
    mh = a.matrix.conj().T.tocoo()
    rows = np.concatenate([m.row, mh.row])
    cols = np.concatenate([m.col, mh.col])
    # COO -> CSR sums duplicates but keeps cancelled entries as explicit zeros
    h = sp.coo_array((np.concatenate([0.5 * m.data, 0.5 * mh.data]), (rows, cols)), shape=m.shape)
    s = sp.coo_array((np.concatenate([0.5 * m.data, -0.5 * mh.data]), (rows, cols)), shape=m.shape)
    return SplitOperator(a=a, h=SparseOperator(h.tocsr(), "hermitian"),
                         s=SparseOperator(s.tocsr(), "skew"))


def realify(h: SparseOperator, b: np.ndarray, tol: float = 1e-14) -> tuple[sp.csr_array, np.ndarray]:
    """Real 2N form [[Re H, -Im H], [Im H, Re H]] and stacked (Re b; Im b)."""
    m = h.matrix
    dev = abs(m - m.conj().T)
    scale = max(h.max_abs(), 1.0)
    if dev.nnz and dev.max() > tol * scale:
        raise ValueError("realify requires a Hermitian operator")
    re = sp.csr_array(m.real)
    im = sp.csr_array(m.imag)
    big = sp.block_array([[re, -im], [im, re]], format="csr")
    b = as_vector(b, h.n)
    return big, np.concatenate([b.real, b.imag])


# ---------------------------------------------------------------------------
# file formats


def read_matrix_market(path) -> SparseOperator:
    return SparseOperator(sp.csr_array(scipy.io.mmread(str(path))))


def write_matrix_market(path, op: SparseOperator, comment: str = "") -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(op.matrix), comment=comment, field="complex",
                     symmetry="general")


def write_vector(path, v: np.ndarray) -> None:
    v = as_vector(v)
    np.savetxt(path, np.column_stack([v.real, v.imag]), fmt="%.17g")


def read_vector(path) -> np.ndarray:
    arr = np.loadtxt(Path(path), ndmin=2)
    if arr.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns 're im'")
    return arr[:, 0] + 1j * arr[:, 1]


class ShiftedOperator:
    """``shift * I + sign * base`` applied as shift-plus-matvec, never stored.

    One application costs one matvec of ``base``; the shift is folded into
    the product and not counted as a separate vector update.
    """

    __slots__ = ("base", "shift", "sign")

    def __init__(self, base, shift: float, sign: int = 1):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.base = base
        self.shift = float(shift)
        self.sign = sign

    @property
    def n(self) -> int:
        return self.base.n

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = self.base.apply(x)
        return self.shift * x + y if self.sign > 0 else self.shift * x - y

    __matmul__ = apply

    def toarray(self) -> np.ndarray:
        return self.shift * np.eye(self.n) + self.sign * self.base.toarray()
