"""
Experiment orchestration: config files, single runs, grids, gradient checks and artifacts.
"""

from .artifacts import load_checkpoint, read_metrics, save_checkpoint, write_metrics, write_trace
from .config_loader import config_to_flat, load_run_config, parse_run_config, write_resolved_config
from .experiment import ExperimentResult, Splits, evaluate_params, load_splits, run_experiment
from .gradcheck import GradcheckReport, run_gradcheck
from .grid import GridResult, run_grid

__all__ = [
    "ExperimentResult",
    "GradcheckReport",
    "GridResult",
    "Splits",
    "config_to_flat",
    "evaluate_params",
    "load_checkpoint",
    "load_run_config",
    "load_splits",
    "parse_run_config",
    "read_metrics",
    "run_experiment",
    "run_grid",
    "run_gradcheck",
    "save_checkpoint",
    "write_metrics",
    "write_resolved_config",
    "write_trace",
]
