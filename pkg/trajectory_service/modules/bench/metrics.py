from __future__ import annotations

from typing import Optional

import numpy as np

from errors import DomainError
from modules.gp.trajectory import GpTrajectory
from modules.lie.so3 import so3_log, transpose
from modules.simulation.ground_truth import PoseFunction


def sample_times(estimate: GpTrajectory, period: float, start: float = 0.0, end: Optional[float] = None) -> np.ndarray:
    """Times k * period inside the overlap of the estimate with [start, end]."""
    lo = max(estimate.t0, start)
    hi = estimate.end_time if end is None else min(estimate.end_time, end)
    if hi < lo:
        raise DomainError(f"estimate [{estimate.t0:.3f}, {estimate.end_time:.3f}] does not overlap [{start:.3f}, {end}]")
    first = np.ceil(lo / period - 1e-9)
    last = np.floor(hi / period + 1e-9)
    times = np.arange(first, last + 1) * period
    times = times[(times >= lo - 1e-9 * period) & (times <= hi + 1e-9 * period)]
    if times.size == 0:
        raise DomainError("no evaluation sample falls inside the overlap")
    return np.clip(times, lo, hi)


def pose_errors(estimate: GpTrajectory, gt: PoseFunction, times) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample position error norms (m) and rotation error angles (rad)."""
    state = estimate.interpolate(times)
    truth = gt.pose(state.times)
    position = np.linalg.norm(state.position - truth.translation, axis=-1)
    rotation = np.linalg.norm(so3_log(transpose(truth.rotation) @ state.rotation), axis=-1)
    return position, rotation


def evaluate_rmse(
    estimate: GpTrajectory,
    gt: PoseFunction,
    period: float,
    start: float = 0.0,
    end: Optional[float] = None,
) -> tuple[float, float]:
    """
    Position and rotation RMSE of an estimate against ground truth, without alignment.

    Raises:
        DomainError: when the estimate and [start, end] do not overlap.
    """
    position, rotation = pose_errors(estimate, gt, sample_times(estimate, period, start, end))
    return float(np.sqrt(np.mean(position**2))), float(np.sqrt(np.mean(rotation**2)))


__all__ = ["sample_times", "pose_errors", "evaluate_rmse"]
