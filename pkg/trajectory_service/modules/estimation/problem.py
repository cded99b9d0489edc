from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import sparse

from logger_config import logger
from modules.estimation.factors import Factor, FactorTerms
from modules.estimation.state import EXTRINSIC_DIM, ColumnLayout, EstimationState
from modules.gp.trajectory import GpTrajectory
from modules.lie.se3 import Pose3
from schemas.solver import SolverOptions
from schemas.trajectory_types import STATE_DIM


@dataclass(slots=True)
class Linearization:
    residual: np.ndarray  # (m,) whitened and robustified
    jacobian: Optional[sparse.csr_matrix]  # (m, free columns)
    cost: float


def huber_weights(norms: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """IRLS weights and robust cost per residual block for the Huber loss."""
    weights = np.where(norms <= delta, 1.0, delta / np.maximum(norms, 1e-300))
    cost = np.where(norms <= delta, 0.5 * norms**2, delta * (norms - 0.5 * delta))
    return weights, cost


class Problem:
    """
    Parameter blocks (trajectory knots, extrinsic poses) and the factors on them.

    Factors address trajectories and extrinsics by the integer handles returned
    from `add_trajectory` / `add_extrinsic`.
    """

    def __init__(self) -> None:
        self.trajectories: list[GpTrajectory] = []
        self.extrinsics: list[Pose3] = []
        self.factors: list[Factor] = []
        self.frozen_knots: dict[int, set[int]] = {}
        self.frozen_extrinsics: set[int] = set()

    def add_trajectory(self, traj: GpTrajectory) -> int:
        self.trajectories.append(traj)
        return len(self.trajectories) - 1

    def add_extrinsic(self, pose: Pose3) -> int:
        self.extrinsics.append(pose)
        return len(self.extrinsics) - 1

    def add_factor(self, factor: Optional[Factor]) -> None:
        if factor is not None and len(factor) > 0:
            self.factors.append(factor)

    def add_factors(self, factors: Iterable[Optional[Factor]]) -> None:
        for factor in factors:
            self.add_factor(factor)

    def clear_factors(self) -> None:
        self.factors = []

    # Freezing

    def freeze_knots(self, traj_id: int, knots: Iterable[int]) -> None:
        self.frozen_knots.setdefault(traj_id, set()).update(int(k) for k in knots)

    def freeze_knots_before(self, traj_id: int, time: float) -> int:
        """Freeze every knot of a trajectory strictly older than `time`; returns the first free knot."""
        traj = self.trajectories[traj_id]
        first_free = int(np.searchsorted(traj.knot_times, time - 1e-9 * traj.dt, side="left"))
        self.frozen_knots[traj_id] = set(range(first_free))
        return first_free

    def freeze_extrinsic(self, index: int) -> None:
        self.frozen_extrinsics.add(index)

    def unfreeze_all(self) -> None:
        self.frozen_knots.clear()
        self.frozen_extrinsics.clear()

    # Evaluation

    def state(self) -> EstimationState:
        return EstimationState(list(self.trajectories), list(self.extrinsics))

    def commit(self, state: EstimationState) -> None:
        for traj, solved in zip(self.trajectories, state.trajectories):
            traj.update_from(solved)
        self.extrinsics[:] = state.extrinsics

    def free_columns(self, layout: ColumnLayout) -> np.ndarray:
        free = np.ones(layout.size, dtype=bool)
        for traj_id, knots in self.frozen_knots.items():
            for k in knots:
                if k < layout.knot_counts[traj_id]:
                    start = int(layout.knot(traj_id, k))
                    free[start : start + STATE_DIM] = False
        for index in self.frozen_extrinsics:
            start = layout.extrinsic(index)
            free[start : start + EXTRINSIC_DIM] = False
        return np.flatnonzero(free)

    def _terms(self, factor: Factor, state: EstimationState, layout: ColumnLayout, options: SolverOptions, with_jacobian: bool):
        terms: FactorTerms = factor.evaluate(state, layout, with_jacobian)
        norms = np.linalg.norm(terms.residual, axis=-1)
        if factor.robust and options.loss == "huber":
            weights, cost = huber_weights(norms, options.huber_delta)
            scale = np.sqrt(weights)
            terms.residual = terms.residual * scale[:, None]
            for block in terms.blocks:
                block.values = block.values * scale[:, None, None]
            return terms, float(cost.sum())
        return terms, 0.5 * float(np.sum(norms**2))

    def cost(self, state: EstimationState, options: SolverOptions) -> float:
        layout = ColumnLayout(state)
        return sum(self._terms(f, state, layout, options, False)[1] for f in self.factors)

    def linearize(self, state: EstimationState, options: SolverOptions, free: np.ndarray) -> Linearization:
        layout = ColumnLayout(state)
        residuals, rows, cols, values = [], [], [], []
        total_cost, row_start = 0.0, 0
        for factor in self.factors:
            terms, cost = self._terms(factor, state, layout, options, True)
            total_cost += cost
            n, dim = terms.residual.shape
            row_index = row_start + np.arange(n * dim).reshape(n, dim)
            for block in terms.blocks:
                width = block.values.shape[-1]
                col_index = block.columns[:, None] + np.arange(width)
                rows.append(np.broadcast_to(row_index[:, :, None], block.values.shape).ravel())
                cols.append(np.broadcast_to(col_index[:, None, :], block.values.shape).ravel())
                values.append(block.values.ravel())
            residuals.append(terms.residual.ravel())
            row_start += n * dim

        if not residuals:
            logger.warning("Problem has no factors")
            return Linearization(np.zeros(0), sparse.csr_matrix((0, len(free))), 0.0)
        full = sparse.coo_matrix(
            (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(row_start, layout.size)
        ).tocsr()
        return Linearization(np.concatenate(residuals), full[:, free], total_cost)

    def summary(self) -> str:
        kinds: dict[str, int] = {}
        for factor in self.factors:
            kinds[factor.kind] = kinds.get(factor.kind, 0) + len(factor)
        parts = ", ".join(f"{kind}={count}" for kind, count in kinds.items())
        return f"{len(self.trajectories)} trajectories, {len(self.extrinsics)} extrinsics, factors: {parts or 'none'}"
