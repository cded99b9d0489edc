from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from modules.gp.trajectory import GpTrajectory
from modules.lie.se3 import Pose3, se3_exp
from schemas.trajectory_types import STATE_DIM

EXTRINSIC_DIM = 6


@dataclass(slots=True)
class EstimationState:
    """Values of every parameter block: trajectory knots and extrinsic poses."""

    trajectories: list[GpTrajectory] = field(default_factory=list)
    extrinsics: list[Pose3] = field(default_factory=list)

    def copy(self) -> "EstimationState":
        return EstimationState(
            [traj.copy() for traj in self.trajectories],
            [Pose3(pose.rotation.copy(), pose.translation.copy()) for pose in self.extrinsics],
        )

    def retracted(self, delta: np.ndarray, layout: "ColumnLayout") -> "EstimationState":
        """New state moved by a full-size tangent increment (right-plus on every block)."""
        out = self.copy()
        for i, traj in enumerate(out.trajectories):
            start = layout.trajectory_offsets[i]
            traj.retract(delta[start : start + traj.num_knots * STATE_DIM])
        for i, pose in enumerate(out.extrinsics):
            start = layout.extrinsic_offsets[i]
            out.extrinsics[i] = pose.compose(se3_exp(delta[start : start + EXTRINSIC_DIM]))
        return out


class ColumnLayout:
    """Column offsets of the parameter blocks: knots (18 each) per trajectory, then extrinsics (6 each)."""

    def __init__(self, state: EstimationState) -> None:
        sizes = [traj.num_knots * STATE_DIM for traj in state.trajectories]
        self.trajectory_offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.knot_counts = [traj.num_knots for traj in state.trajectories]
        knots_end = int(self.trajectory_offsets[-1])
        self.extrinsic_offsets = knots_end + EXTRINSIC_DIM * np.arange(len(state.extrinsics), dtype=int)
        self.size = knots_end + EXTRINSIC_DIM * len(state.extrinsics)

    def knot(self, traj_id: int, k) -> np.ndarray:
        return self.trajectory_offsets[traj_id] + STATE_DIM * np.asarray(k, dtype=int)

    def extrinsic(self, index: int) -> int:
        return int(self.extrinsic_offsets[index])
