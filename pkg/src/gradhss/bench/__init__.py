from .audit import AuditResult, audit_counters
from .config import ExperimentConfig, load_config, resolve_problem
from .experiments import run

__all__ = ["AuditResult", "audit_counters", "ExperimentConfig", "load_config", "resolve_problem", "run"]
