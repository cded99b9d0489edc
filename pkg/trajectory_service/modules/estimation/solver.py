from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from config import settings
from errors import TrajectoryError
from logger_config import logger
from modules.estimation.problem import Linearization, Problem
from modules.estimation.state import ColumnLayout, EstimationState
from schemas.solver import IterationRecord, SolveReport, SolverOptions


@dataclass(slots=True)
class NormalEquations:
    """
    Jacobi-scaled normal equations of one linearization.

    With D = diag(max(diag(J^T J), floor))^-1/2 the damped system
    (J^T J + lam * D^-2) d = -J^T r becomes (D J^T J D + lam I) y = -D J^T r
    with d = D y. Both forms give the same step; only the scaled one is factored.
    """

    hessian: sparse.csc_matrix  # D J^T J D
    gradient: np.ndarray  # D J^T r
    scale: np.ndarray  # diagonal of D

    @classmethod
    def from_linearization(cls, lin: Linearization, floor: float) -> "NormalEquations":
        jacobian = lin.jacobian
        diagonal = np.asarray(jacobian.multiply(jacobian).sum(axis=0)).ravel()
        scale = 1.0 / np.sqrt(np.maximum(diagonal, max(floor, np.finfo(float).tiny)))
        scaled = jacobian @ sparse.diags(scale)
        return cls((scaled.T @ scaled).tocsc(), scaled.T @ lin.residual, scale)

    def step(self, lam: float) -> np.ndarray:
        system = (self.hessian + lam * sparse.identity(len(self.scale), format="csc")).tocsc()
        return -self.scale * splu(system).solve(self.gradient)

    def max_cosine(self, residual_norm: float) -> float:
        """Largest cosine between the residual and a Jacobian column."""
        if residual_norm == 0.0:
            return 0.0
        return float(np.max(np.abs(self.gradient))) / residual_norm


def _trial_cost(problem: Problem, trial: EstimationState, options: SolverOptions) -> float:
    try:
        return problem.cost(trial, options)
    except TrajectoryError as exc:
        logger.debug(f"Trial state rejected: {exc}")
        return np.inf


def _at_minimum(lin: Linearization, normal: NormalEquations, options: SolverOptions) -> Optional[str]:
    if lin.cost <= options.cost_floor * lin.residual.size:
        return "cost below floor"
    if normal.max_cosine(float(np.linalg.norm(lin.residual))) <= options.gradient_tol:
        return "gradient below tolerance"
    return None


def solve(problem: Problem, options: Optional[SolverOptions] = None) -> SolveReport:
    """
    Levenberg-Marquardt on the whitened residuals of `problem`.

    The solved values are written back into the problem's trajectories and
    extrinsics. Numerical failures end the solve with `converged=False`.

    Args:
        problem: Parameter blocks, factors and frozen blocks.
        options: Solver options; defaults come from settings.

    Returns:
        SolveReport with one record per iteration.
    """
    options = options or SolverOptions.from_settings(settings)
    started = time.time()
    state = problem.state()
    layout = ColumnLayout(state)
    free = problem.free_columns(layout)
    report = SolveReport()

    lin = problem.linearize(state, options, free)
    report.initial_cost = report.final_cost = lin.cost
    if len(free) == 0 or lin.residual.size == 0:
        report.converged = True
        report.message = "nothing to optimize"
        report.wall_time = time.time() - started
        return report

    normal = NormalEquations.from_linearization(lin, options.lambda_min)
    reason = _at_minimum(lin, normal, options)
    if reason:
        report.converged = True
        report.message = f"converged: {reason}"
        report.wall_time = time.time() - started
        return report

    cost, lam = lin.cost, options.lambda0
    for iteration in range(1, options.max_iters + 1):
        report.iterations = iteration
        try:
            step = normal.step(lam)
        except RuntimeError as exc:
            report.message = f"singular normal equations: {exc}"
            logger.warning(f"Solve stopped at iteration {iteration}: {report.message}")
            break
        if not np.all(np.isfinite(step)):
            report.message = "singular normal equations: non-finite step"
            logger.warning(f"Solve stopped at iteration {iteration}: {report.message}")
            break

        delta = np.zeros(layout.size)
        delta[free] = step
        step_norm = float(np.max(np.abs(step)))
        trial = state.retracted(delta, layout)
        trial_cost = _trial_cost(problem, trial, options)
        accepted = bool(np.isfinite(trial_cost) and trial_cost <= cost)
        record = IterationRecord(
            iteration=iteration, cost=trial_cost if accepted else cost, lam=lam, step_norm=step_norm, accepted=accepted
        )
        report.records.append(record)
        logger.debug(f"LM iteration {iteration}: {record.model_dump()}")

        if accepted:
            decrease = (cost - trial_cost) / max(cost, np.finfo(float).tiny)
            state, cost = trial, trial_cost
            lam = max(lam * options.lambda_down, np.finfo(float).tiny)
            if decrease < options.tol or step_norm < options.step_tol:
                report.converged = True
                break
            lin = problem.linearize(state, options, free)
            normal = NormalEquations.from_linearization(lin, options.lambda_min)
            reason = _at_minimum(lin, normal, options)
            if reason:
                report.converged = True
                report.message = f"converged: {reason}"
                break
        else:
            if step_norm < options.step_tol or (np.isfinite(trial_cost) and trial_cost - cost <= options.tol * cost):
                report.converged = True
                break
            lam *= options.lambda_up

    problem.commit(state)
    report.final_cost = cost
    report.wall_time = time.time() - started
    if not report.converged:
        if not report.message:
            report.message = f"no convergence within {options.max_iters} iterations"
        logger.warning(f"Solve did not converge: {report.message} (cost {report.initial_cost:.6g} -> {cost:.6g})")
    else:
        report.message = report.message or "converged"
    return report
