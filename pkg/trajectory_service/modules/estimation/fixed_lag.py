"""Sliding-window estimation with knot freezing in place of marginalization."""
from __future__ import annotations

from typing import Callable, Optional, Protocol

import numpy as np

from errors import DomainError
from logger_config import logger
from modules.estimation.factors import Factor, extrinsic_prior_factor, motion_prior_factors
from modules.estimation.problem import Problem
from modules.estimation.solver import solve
from modules.lie.se3 import Pose3
from schemas.solver import SolveReport, SolverOptions

DEFAULT_EXTRINSIC_INFORMATION = 1e2


class WindowSource(Protocol):
    def factors(self, start: float, end: float) -> list[Factor]:
        """Measurement factors with timestamps in [start, end]."""


WindowCallback = Callable[[float, Problem, SolveReport], None]


def window_ends(t0: float, t_end: float, window: float, slide: float) -> np.ndarray:
    """Right edges of the successive windows; the last one is clipped to t_end."""
    first = min(t0 + window, t_end)
    if first >= t_end or slide <= 0:
        return np.array([t_end])
    count = int(np.ceil((t_end - first) / slide - 1e-9))
    ends = first + slide * np.arange(count + 1)
    ends[-1] = min(ends[-1], t_end)
    return ends


def fixed_lag_run(
    problem: Problem,
    source: WindowSource,
    window: float,
    slide: float,
    t_end: float,
    options: Optional[SolverOptions] = None,
    extrinsic_information=DEFAULT_EXTRINSIC_INFORMATION,
    on_window: Optional[WindowCallback] = None,
) -> list[SolveReport]:
    """
    Solve a problem window by window.

    For each window [end - window, end] the trajectories are extended to `end`,
    the factors are rebuilt from motion priors on the free intervals and the
    source's measurements, knots older than the window start are frozen, and
    estimated extrinsics get a prior anchored at the previous window's estimate.

    Args:
        problem: Trajectories and extrinsic blocks to estimate; its factors are replaced.
        source: Provides measurement factors for a time range.
        window: Window length in seconds, at least two knot spacings.
        slide: Distance between successive window ends in seconds.
        t_end: End time of the run.
        options: Solver options for every window.
        extrinsic_information: Information (scalar or 6x6) of the extrinsic priors.
        on_window: Called after each window with (end, problem, report).

    Returns:
        One SolveReport per window.
    """
    if not problem.trajectories:
        raise DomainError("fixed-lag run needs at least one trajectory")
    dt = max(traj.dt for traj in problem.trajectories)
    if window < 2 * dt:
        raise DomainError(f"window of {window}s is shorter than two knot spacings ({2 * dt}s)")
    t0 = min(traj.t0 for traj in problem.trajectories)

    reports: list[SolveReport] = []
    for index, end in enumerate(window_ends(t0, t_end, window, slide)):
        start = max(t0, end - window)
        problem.clear_factors()
        problem.unfreeze_all()
        for traj_id, traj in enumerate(problem.trajectories):
            traj.extend_to(end)
            first_free = problem.freeze_knots_before(traj_id, start)
            problem.add_factor(motion_prior_factors(traj_id, traj, first=first_free - 1))
        # A batch-sized first window must stay identical to a batch solve
        if index > 0:
            for ext_id, pose in enumerate(problem.extrinsics):
                anchor = Pose3(pose.rotation.copy(), pose.translation.copy())
                problem.add_factor(extrinsic_prior_factor(ext_id, anchor, extrinsic_information))
        problem.add_factors(source.factors(start, end))

        logger.info(f"Window {index + 1}: [{start:.3f}, {end:.3f}]s, {problem.summary()}")
        report = solve(problem, options)
        report.window_end = float(end)
        reports.append(report)
        if on_window is not None:
            on_window(float(end), problem, report)
    return reports
