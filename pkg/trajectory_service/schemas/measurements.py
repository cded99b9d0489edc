from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np


class RangeMeas(NamedTuple):
    t: float
    tag: int
    anchor: int
    d: float


class LidarPoint(NamedTuple):
    t: float
    lidar: int
    point: np.ndarray
    wall: int


def _empty(shape=(0,), dtype=float) -> np.ndarray:
    return np.zeros(shape, dtype=dtype)


@dataclass(slots=True)
class RangeMeasurements:
    """Column-wise UWB ranges sorted by time."""
    t: np.ndarray = field(default_factory=_empty)
    tag: np.ndarray = field(default_factory=lambda: _empty(dtype=int))
    anchor: np.ndarray = field(default_factory=lambda: _empty(dtype=int))
    d: np.ndarray = field(default_factory=_empty)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[RangeMeas]:
        for i in range(len(self)):
            yield RangeMeas(float(self.t[i]), int(self.tag[i]), int(self.anchor[i]), float(self.d[i]))

    def select(self, mask: np.ndarray) -> "RangeMeasurements":
        return RangeMeasurements(self.t[mask], self.tag[mask], self.anchor[mask], self.d[mask])

    def between(self, start: float, end: float) -> "RangeMeasurements":
        return self.select((self.t >= start) & (self.t <= end))


@dataclass(slots=True)
class LidarMeasurements:
    """Column-wise lidar points in the sensor frame with the wall each ray hit."""
    t: np.ndarray = field(default_factory=_empty)
    lidar: np.ndarray = field(default_factory=lambda: _empty(dtype=int))
    points: np.ndarray = field(default_factory=lambda: _empty((0, 3)))
    wall: np.ndarray = field(default_factory=lambda: _empty(dtype=int))

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[LidarPoint]:
        for i in range(len(self)):
            yield LidarPoint(float(self.t[i]), int(self.lidar[i]), self.points[i], int(self.wall[i]))

    def select(self, mask: np.ndarray) -> "LidarMeasurements":
        return LidarMeasurements(self.t[mask], self.lidar[mask], self.points[mask], self.wall[mask])

    def between(self, start: float, end: float) -> "LidarMeasurements":
        return self.select((self.t >= start) & (self.t <= end))

    def of_lidar(self, lidar: int) -> "LidarMeasurements":
        return self.select(self.lidar == lidar)


@dataclass(slots=True)
class MeasurementSet:
    ranges: RangeMeasurements = field(default_factory=RangeMeasurements)
    lidar: LidarMeasurements = field(default_factory=LidarMeasurements)

    def __len__(self) -> int:
        return len(self.ranges) + len(self.lidar)
