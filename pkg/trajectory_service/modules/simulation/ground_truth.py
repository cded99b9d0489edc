"""Analytic ground-truth motions and time-varying sensor mounts."""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from errors import DomainError
from modules.lie.se3 import Pose3
from modules.lie.so3 import so3_exp, so3_log, transpose
from schemas.experiment import GtKind
from schemas.trajectory_types import SupportState

# Phase constants of the benchmark motions, in radians
PHASE_A = 57.0
PHASE_B = 43.0
TRANSLATION_AMPLITUDE = 5.0
SPLIT_TRANSLATION_RATES = (0.45, 0.15)
LISSAJOUS_AMPLITUDE = 2.0
LISSAJOUS_HEIGHT = 0.75

# Central-difference steps for rates and their derivatives
RATE_STEP = 1e-5
ACCEL_STEP = 1e-3
_DEGENERATE = 1e-9


class PoseFunction(ABC):
    """Pose as a smooth function of time, evaluated for arrays of times."""

    @abstractmethod
    def pose(self, t) -> Pose3: ...

    def body_rate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        before, after = self.pose(t - RATE_STEP).rotation, self.pose(t + RATE_STEP).rotation
        return so3_log(transpose(before) @ after) / (2.0 * RATE_STEP)

    def kinematics(self, t) -> SupportState:
        """
        Full kinematic state by central differences of the pose.

        Returns body angular velocity/acceleration and world-frame velocity and
        acceleration, batched over `t`.
        """
        t = np.asarray(t, dtype=float)
        pose = self.pose(t)
        h = ACCEL_STEP
        p_before, p_after = self.pose(t - h).translation, self.pose(t + h).translation
        return SupportState(
            rotation=pose.rotation,
            omega=self.body_rate(t),
            alpha=(self.body_rate(t + h) - self.body_rate(t - h)) / (2.0 * h),
            position=pose.translation,
            velocity=(p_after - p_before) / (2.0 * h),
            acceleration=(p_after - 2.0 * pose.translation + p_before) / (h * h),
        )


def _tangent_frame(position: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    """Columns e_x along the velocity, e_z normal to position and e_x, e_y completing the frame."""
    speed = np.linalg.norm(velocity, axis=-1, keepdims=True)
    if np.any(speed < _DEGENERATE):
        raise DomainError("tangent frame undefined where the velocity vanishes")
    e_x = velocity / speed
    radial = position / np.linalg.norm(position, axis=-1, keepdims=True)
    e_z = np.cross(radial, e_x)
    norm = np.linalg.norm(e_z, axis=-1, keepdims=True)
    if np.any(norm < _DEGENERATE):
        raise DomainError("tangent frame undefined where position and velocity are parallel")
    e_z = e_z / norm
    e_y = np.cross(e_z, e_x)
    return np.stack([e_x, e_y, e_z], axis=-1)


@dataclass(frozen=True, slots=True)
class GtTrajectory(PoseFunction):
    kind: GtKind
    omega: float

    def translation(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Position and its analytic time derivative."""
        t = np.asarray(t, dtype=float)
        w = self.omega
        if self.kind == GtKind.LISSAJOUS:
            a = LISSAJOUS_AMPLITUDE
            s, c = np.sin(w * t), np.cos(w * t)
            position = np.stack([a * s, a * s * c, np.full_like(t, LISSAJOUS_HEIGHT)], axis=-1)
            velocity = np.stack([a * w * c, a * w * np.cos(2.0 * w * t), np.zeros_like(t)], axis=-1)
            return position, velocity
        if self.kind == GtKind.SPLIT:
            fast, slow = SPLIT_TRANSLATION_RATES
        else:
            fast, slow = w, w / 3.0
        a = TRANSLATION_AMPLITUDE
        position = np.stack(
            [a * np.sin(fast * t + PHASE_B), a * np.cos(fast * t + PHASE_B), a * np.cos(slow * t + PHASE_A)],
            axis=-1,
        )
        velocity = np.stack(
            [
                a * fast * np.cos(fast * t + PHASE_B),
                -a * fast * np.sin(fast * t + PHASE_B),
                -a * slow * np.sin(slow * t + PHASE_A),
            ],
            axis=-1,
        )
        return position, velocity

    def rotation_vector(self, t) -> np.ndarray:
        """Split motion only: theta_t with R_t = Exp(theta_t)."""
        t = np.asarray(t, dtype=float)
        w = self.omega
        return np.stack(
            [
                np.pi / 2.0 * np.cos(w * t + PHASE_A),
                np.pi / 2.0 * np.sin(w * t + PHASE_A),
                np.pi * np.sqrt(3.0) / 2.0 * np.sin(w * t / 3.0 + PHASE_B),
            ],
            axis=-1,
        )

    def pose(self, t) -> Pose3:
        position, velocity = self.translation(t)
        if self.kind == GtKind.SPLIT:
            rotation = so3_exp(self.rotation_vector(t))
        else:
            rotation = _tangent_frame(position, velocity)
        return Pose3(rotation, position)


def gt_pose(traj: PoseFunction, t) -> Pose3:
    return traj.pose(t)


def mount_pose(yaw_pitch_roll_deg, translation) -> Pose3:
    """Pose from a yaw-pitch-roll (degrees, intrinsic Z-Y-X) and a translation."""
    rotation = Rotation.from_euler("ZYX", yaw_pitch_roll_deg, degrees=True).as_matrix()
    return Pose3(rotation, np.asarray(translation, dtype=float))


@dataclass(frozen=True, slots=True)
class MountSchedule:
    """
    Body-to-sensor mount, optionally replaced by `switched` on the open interval
    (switch_start, switch_end).
    """
    base: Pose3
    switched: Optional[Pose3] = None
    switch_start: float = 0.0
    switch_end: float = 0.0

    @classmethod
    def fixed(cls, pose: Pose3) -> "MountSchedule":
        return cls(pose)

    def active(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.switched is None:
            return np.zeros(t.shape, dtype=bool)
        return (t > self.switch_start) & (t < self.switch_end)

    def at(self, t) -> Pose3:
        t = np.asarray(t, dtype=float)
        active = self.active(t)[..., None]
        rotation = np.where(active[..., None], self._switched.rotation, self.base.rotation)
        translation = np.where(active, self._switched.translation, self.base.translation)
        return Pose3(rotation, translation)

    @property
    def _switched(self) -> Pose3:
        return self.switched if self.switched is not None else self.base


@dataclass(frozen=True, slots=True)
class MountedTrajectory(PoseFunction):
    """Sensor pose: body pose composed with the mount at the same time."""
    body: PoseFunction
    mount: MountSchedule

    def pose(self, t) -> Pose3:
        return self.body.pose(t).compose(self.mount.at(t))


__all__ = [
    "PoseFunction",
    "GtTrajectory",
    "gt_pose",
    "mount_pose",
    "MountSchedule",
    "MountedTrajectory",
]
