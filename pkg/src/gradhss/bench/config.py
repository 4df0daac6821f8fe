"""Experiment configuration and problem references.

A problem reference is a short string such as ``cd3d:m=16,theta=1``,
``diag8``, ``logspace:lo=1e-3,hi=1,n=1000``, ``randherm:n=400,lo=0.64,hi=1,seed=3``
or ``mtx:path=A.mtx``. Config files are INI-style; every key may sit in any
section and command-line flags override them.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, asdict
from pathlib import Path

from ..linops import SparseOperator, read_matrix_market
from ..problems import EIGHT_DIAG, Cd3dSpec, SpectrumSpec, cd3d, diag_matrix, random_hermitian

KINDS = ("gradient-trace", "estimate", "gamma-sweep", "pahss", "solver-race", "bound-check")

# per-kind defaults, applied below config-file values and flags
KIND_DEFAULTS = {
    "gradient-trace": {"problem": "diag8", "rhs": "from-solution", "iters": 30},
    "estimate": {"problem": "diag8", "rhs": "from-solution", "eta": 500},
    "gamma-sweep": {"problem": "cd3d:m=9"},
    "pahss": {"problem": "cd3d:m=16", "etas": "5,10,20,50,100"},
    "solver-race": {"problem": "cd3d:m=40", "gamma": 1.0, "eps1": 0.1, "eps2": 1e-4, "reps": 10},
    "bound-check": {"problem": "cd3d:m=3"},
}


@dataclass
class Problem:
    ref: str
    operator: SparseOperator
    meta: dict

    @property
    def lam_min(self) -> float | None:
        return self.meta.get("lambda_1")

    @property
    def lam_max(self) -> float | None:
        return self.meta.get("lambda_N")

    @property
    def gamma_star(self) -> float | None:
        return self.meta.get("gamma_star")


def _parse_args(text: str) -> dict[str, str]:
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value in problem reference, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _spectrum_meta(vals) -> dict:
    lo, hi = float(min(vals)), float(max(vals))
    return {"lambda_1": lo, "lambda_N": hi, "gamma_star": math.sqrt(lo * hi)}


def resolve_problem(ref: str) -> Problem:
    name, _, rest = ref.partition(":")
    args = _parse_args(rest)
    name = name.strip().lower()
    if name == "cd3d":
        spec = Cd3dSpec(m=int(args.get("m", 9)), theta=float(args.get("theta", 1.0)),
                        scaling=args.get("scaling", "h2"))
        lo, hi = spec.hermitian_extremes()
        meta = {"kind": "cd3d", "spec": asdict(spec), "lambda_1": lo, "lambda_N": hi,
                "gamma_star": spec.gamma_star()}
        return Problem(ref, cd3d(spec), meta)
    if name == "diag8":
        spec = SpectrumSpec(values=EIGHT_DIAG)
        return Problem(ref, diag_matrix(spec), {"kind": "diag", "spec": spec.to_dict(),
                                                 **_spectrum_meta(EIGHT_DIAG)})
    if name in ("logspace", "explicit"):
        if name == "logspace":
            spec = SpectrumSpec(kind="logspace", lo=float(args.get("lo", 1e-3)),
                                hi=float(args.get("hi", 1.0)), n=int(args.get("n", 1000)))
        else:
            spec = SpectrumSpec(values=tuple(float(v) for v in args["values"].split(";")))
        return Problem(ref, diag_matrix(spec), {"kind": "diag", "spec": spec.to_dict(),
                                                 **_spectrum_meta(spec.eigenvalues())})
    if name == "randherm":
        n = int(args.get("n", 200))
        seed = int(args.get("seed", 0))
        density = float(args.get("density", 0.05))
        rotations = int(args["rotations"]) if "rotations" in args else None
        if "lo" in args:
            spec = SpectrumSpec(kind="logspace", lo=float(args["lo"]), hi=float(args.get("hi", 1.0)),
                                n=n, shuffle=True, seed=seed)
            op = random_hermitian(n, density, seed, spec, rotations)
            meta = {"kind": "randherm", "spec": spec.to_dict(), "seed": seed, "density": density,
                    **_spectrum_meta(spec.eigenvalues())}
        else:
            op = random_hermitian(n, density, seed)
            meta = {"kind": "randherm", "seed": seed, "density": density}
        return Problem(ref, op, meta)
    if name == "mtx":
        return Problem(ref, read_matrix_market(args["path"]), {"kind": "mtx", "path": args["path"]})
    raise ValueError(f"unknown problem reference {ref!r}")


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _ints(text) -> tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _strs(text) -> tuple[str, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(str(v) for v in text)
    return tuple(v.strip() for v in str(text).replace(";", ",").split(",") if v.strip())


def _opt_float(text):
    return None if text in (None, "", "none", "None") else float(text)


def _opt_int(text):
    return None if text in (None, "", "none", "None") else int(text)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


@dataclass
class ExperimentConfig:
    kind: str
    problem: str = "cd3d:m=9"
    rhs: str = "complex-uniform"
    seed: int = 0
    reps: int = 1
    out: str = "results"
    workers: int = 1
    # solver settings
    gamma: float | None = None
    gamma_floor: float = 0.0
    eta: int = 50
    etas: tuple[int, ...] = ()
    stagnation: bool = False
    lineage: str = "SD"
    mode: str = "direct"
    shift: float = 1.0
    eps: float = 1e-6
    eps1: float = 1e-4
    eps2: float = 1e-4
    inner: str = "cg"
    warm_start: bool = True
    restart: int | None = None
    max_outer: int = 2000
    iters: int = 30
    # sweeps and races
    sizes: tuple[int, ...] = ()
    gammas: tuple[float, ...] = ()
    gamma_range: tuple[float, ...] = (0.5, 3.5, 0.25)
    methods: tuple[str, ...] = ("HSS-CG", "HSS-BB", "ORTHODIR")

    _CONVERTERS = {
        "seed": int, "reps": int, "workers": int, "gamma": _opt_float, "gamma_floor": float,
        "eta": int, "etas": _ints, "stagnation": _bool, "shift": float, "eps": float,
        "eps1": float, "eps2": float, "warm_start": _bool, "restart": _opt_int,
        "max_outer": int, "iters": int, "sizes": _ints, "gammas": _floats,
        "gamma_range": _floats, "methods": _strs,
    }

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        for f in fields(self):
            conv = self._CONVERTERS.get(f.name)
            if conv is not None:
                setattr(self, f.name, conv(getattr(self, f.name)))
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.inner.lower() not in ("cg", "bb"):
            raise ValueError("inner must be cg or bb")
        if self.kind != "gamma-sweep" or not self.sizes:
            resolve_problem(self.problem)  # fail early on a bad reference

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in fields(self)}

    def gamma_grid(self) -> list[float]:
        if self.gammas:
            return list(self.gammas)
        lo, hi, step = self.gamma_range
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + k * step, 12) for k in range(count)]


def load_config(path, kind: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a flat INI file (sections are ignored) and apply ``overrides``."""
    values: dict = {}
    file_values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(Path(path)):
            raise FileNotFoundError(path)
        for section in parser.sections():
            for key, value in parser.items(section):
                file_values[key.replace("-", "_")] = value
    kind = kind or file_values.get("kind")
    if kind is not None:
        values.update(KIND_DEFAULTS.get(kind, {}))
        values["kind"] = kind
    values.update(file_values)
    if kind is not None:
        values["kind"] = kind
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "kind" not in values:
        raise ValueError("experiment kind missing")
    return ExperimentConfig(**values)
