from .factors import (
    ExtrinsicPriorFactor,
    Factor,
    KnotPriorFactor,
    MotionPriorFactor,
    PointToPlaneFactor,
    UwbFactor,
    extrinsic_prior_factor,
    knot_prior_factor,
    motion_prior_factor,
    motion_prior_factors,
    point2plane_factor,
    prior_covariance,
    uwb_factor,
)
from .fixed_lag import WindowSource, fixed_lag_run, window_ends
from .problem import Problem
from .solver import solve
from .state import ColumnLayout, EstimationState

__all__ = [
    "Factor",
    "MotionPriorFactor",
    "UwbFactor",
    "PointToPlaneFactor",
    "ExtrinsicPriorFactor",
    "KnotPriorFactor",
    "motion_prior_factor",
    "motion_prior_factors",
    "uwb_factor",
    "point2plane_factor",
    "extrinsic_prior_factor",
    "knot_prior_factor",
    "prior_covariance",
    "Problem",
    "solve",
    "fixed_lag_run",
    "window_ends",
    "WindowSource",
    "ColumnLayout",
    "EstimationState",
]
