"""Experiment configs, orchestration and report files."""

from .cli import build_parser, main
from .config import ExperimentConfig, load_config, validate_config
from .runner import RunResult, atomic_write, inequality_rows, run_experiment, thresholds_for

__all__ = [
    "ExperimentConfig",
    "RunResult",
    "atomic_write",
    "build_parser",
    "inequality_rows",
    "load_config",
    "main",
    "run_experiment",
    "thresholds_for",
    "validate_config",
]
