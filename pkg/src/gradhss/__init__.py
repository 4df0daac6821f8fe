"""Hermitian/skew-Hermitian splitting with gradient-based shift estimation."""

__version__ = "0.1.0"

from .linops import SparseOperator, SplitOperator, split  # noqa: E402
from .graditer import run_gradient  # noqa: E402
from .estimator import EstimatorConfig, estimate_direct, estimate_shifted, preadapt  # noqa: E402
from .inner import InnerConfig, bb_solve, cg_solve, cgne_solve  # noqa: E402
from .hss import HssConfig, hss_solve, pahss_solve, contraction_bound  # noqa: E402
from .krylov import orthodir_solve  # noqa: E402

__all__ = [
    "SparseOperator", "SplitOperator", "split", "run_gradient", "EstimatorConfig",
    "estimate_direct", "estimate_shifted", "preadapt", "InnerConfig", "bb_solve", "cg_solve",
    "cgne_solve", "HssConfig", "hss_solve", "pahss_solve", "contraction_bound", "orthodir_solve",
]
