from .experiment import ExperimentConfig, GtKind, InitDerivatives, Scenario
from .measurements import LidarMeasurements, LidarPoint, MeasurementSet, RangeMeas, RangeMeasurements
from .overridable import OverridableModel
from .results import CSV_COLUMNS, RunResult
from .solver import IterationRecord, SolveReport, SolverOptions, SolverOptionsOverrides
from .trajectory_types import InterpolatedState, KinematicsMode, PoseRepr, SupportState

__all__ = [
    "ExperimentConfig",
    "GtKind",
    "InitDerivatives",
    "Scenario",
    "LidarMeasurements",
    "LidarPoint",
    "MeasurementSet",
    "RangeMeas",
    "RangeMeasurements",
    "OverridableModel",
    "CSV_COLUMNS",
    "RunResult",
    "IterationRecord",
    "SolveReport",
    "SolverOptions",
    "SolverOptionsOverrides",
    "InterpolatedState",
    "KinematicsMode",
    "PoseRepr",
    "SupportState",
]
