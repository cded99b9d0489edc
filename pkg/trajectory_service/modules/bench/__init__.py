from .metrics import evaluate_rmse, pose_errors, sample_times
from .runner import ExperimentRunner, run_experiment
from .scenarios import GridPoint, build_grid, scenario_runner

__all__ = [
    "evaluate_rmse",
    "pose_errors",
    "sample_times",
    "ExperimentRunner",
    "run_experiment",
    "GridPoint",
    "build_grid",
    "scenario_runner",
]
