from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

# Row/column layout of one knot (and of an interpolated state) in every Jacobian
STATE_FIELDS = ("rotation", "omega", "alpha", "position", "velocity", "acceleration")
STATE_DIM = 18


class PoseRepr(str, Enum):
    SO3xR3 = "so3xr3"
    SE3 = "se3"


class KinematicsMode(str, Enum):
    CLOSED_FORM = "cf"
    APPROXIMATED = "ap"


def field_slice(name: str) -> slice:
    start = 3 * STATE_FIELDS.index(name)
    return slice(start, start + 3)


@dataclass(slots=True)
class SupportState:
    """Full kinematic state at one time: body-frame rates, world-frame translation levels."""
    rotation: np.ndarray
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(3))
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def at_rest(cls, rotation: np.ndarray, position: np.ndarray) -> "SupportState":
        return cls(np.asarray(rotation, dtype=float), position=np.asarray(position, dtype=float))


@dataclass(slots=True)
class InterpolatedState:
    """
    States at a batch of query times.

    `jacobian[m]` is 18 x 36: rows follow STATE_FIELDS of the queried state, the
    first 18 columns the tangent of the left knot, the last 18 the right knot.
    """
    times: np.ndarray
    knot_index: np.ndarray
    rotation: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    jacobian: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.times)

    def state(self, m: int) -> SupportState:
        return SupportState(
            self.rotation[m],
            self.omega[m],
            self.alpha[m],
            self.position[m],
            self.velocity[m],
            self.acceleration[m],
        )

    def block(self, output: str, knot: int, variable: str) -> np.ndarray:
        """3 x 3 blocks d(output)/d(variable of knot), knot 0 = left, 1 = right."""
        if self.jacobian is None:
            raise ValueError("interpolation was evaluated without Jacobians")
        columns = field_slice(variable)
        offset = STATE_DIM * knot
        return self.jacobian[:, field_slice(output), offset + columns.start : offset + columns.stop]
