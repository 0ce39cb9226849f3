from .config import ExperimentConfig, expand_sweep, load_config, parse_config
from .curves import AggregatedCurve, LearningCurve, aggregate, emit_csv, format_csv, read_csv
from .runner import mcar_eval_dataset, run_control, run_experiment, run_policy_eval, run_trial, step_size
from .sweep import CellResult, run_sweep, select_best, write_run

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "expand_sweep",
    "LearningCurve",
    "AggregatedCurve",
    "aggregate",
    "emit_csv",
    "format_csv",
    "read_csv",
    "step_size",
    "run_policy_eval",
    "run_control",
    "run_experiment",
    "run_trial",
    "mcar_eval_dataset",
    "run_sweep",
    "select_best",
    "write_run",
    "CellResult",
]
