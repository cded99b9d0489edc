"""Line-oriented text dump of trajectory knots."""
from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
from scipy.spatial.transform import Rotation

from errors import TrajectoryError
from modules.gp.trajectory import GpTrajectory
from schemas.trajectory_types import KinematicsMode, PoseRepr, SupportState

KNOT_COLUMNS = (
    "t", "qw", "qx", "qy", "qz",
    "wx", "wy", "wz", "ax", "ay", "az",
    "px", "py", "pz", "vx", "vy", "vz", "aax", "aay", "aaz",
)
_META_KEYS = ("t0", "dt", "repr", "mode")


def trajectory_to_text(traj: GpTrajectory) -> str:
    quaternions = Rotation.from_matrix(traj.rotation).as_quat(scalar_first=True)
    table = np.column_stack(
        [traj.knot_times, quaternions, traj.omega, traj.alpha, traj.position, traj.velocity, traj.acceleration]
    )
    lines = [
        f"# t0={traj.t0!r} dt={traj.dt!r} repr={traj.pose_repr.value} mode={traj.mode.value}",
        "# " + ", ".join(KNOT_COLUMNS),
    ]
    lines.extend(", ".join(f"{value:.17g}" for value in row) for row in table)
    return "\n".join(lines) + "\n"


def save_trajectory(traj: GpTrajectory, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trajectory_to_text(traj), encoding="utf-8")
    return path


def load_trajectory(path: Union[str, Path], **kwargs) -> GpTrajectory:
    """
    Read a file written by `save_trajectory`.

    Extra keyword arguments (noise densities) go to the GpTrajectory constructor.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise TrajectoryError(f"{path}: missing trajectory metadata line")
    meta = dict(item.split("=", 1) for item in lines[0][1:].split())
    missing = [key for key in _META_KEYS if key not in meta]
    if missing:
        raise TrajectoryError(f"{path}: metadata lacks {', '.join(missing)}")

    rows = [line for line in lines[1:] if line.strip() and not line.startswith("#")]
    table = np.array([[float(cell) for cell in row.split(",")] for row in rows], dtype=float)
    if table.ndim != 2 or table.shape[1] != len(KNOT_COLUMNS):
        raise TrajectoryError(f"{path}: expected {len(KNOT_COLUMNS)} columns per knot")

    rotations = Rotation.from_quat(table[:, 1:5], scalar_first=True).as_matrix()
    knots = [
        SupportState(rotations[i], row[5:8], row[8:11], row[11:14], row[14:17], row[17:20])
        for i, row in enumerate(table)
    ]
    return GpTrajectory(
        float(meta["t0"]),
        float(meta["dt"]),
        knots,
        pose_repr=PoseRepr(meta["repr"]),
        mode=KinematicsMode(meta["mode"]),
        **kwargs,
    )


__all__ = ["KNOT_COLUMNS", "save_trajectory", "load_trajectory", "trajectory_to_text"]
