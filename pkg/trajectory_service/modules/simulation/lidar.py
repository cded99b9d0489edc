from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from errors import DomainError, SimulationError
from logger_config import logger
from modules.simulation.ground_truth import MountedTrajectory, MountSchedule, PoseFunction
from modules.utils import rng_stream
from schemas.measurements import LidarMeasurements

LIDAR_STREAM = 2
WALL_NAMES = ("-x", "+x", "-y", "+y", "-z", "+z")


@dataclass(frozen=True, slots=True)
class BoxRoom:
    """Axis-aligned box; wall 2i lies at lower[i], wall 2i+1 at upper[i]."""
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def from_bounds(cls, lower, upper) -> "BoxRoom":
        lower, upper = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
        if lower.shape != (3,) or upper.shape != (3,) or np.any(lower >= upper):
            raise DomainError(f"invalid room bounds {lower} / {upper}")
        return cls(lower, upper)

    @property
    def normals(self) -> np.ndarray:
        """Inward unit normals, one row per wall."""
        eye = np.eye(3)
        return np.stack([sign * eye[axis] for axis in range(3) for sign in (1.0, -1.0)])

    @property
    def offsets(self) -> np.ndarray:
        """c of each wall so that n . x + c = 0 on the wall and > 0 inside."""
        return np.stack([value for pair in zip(-self.lower, self.upper) for value in pair])

    def contains(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.all((points > self.lower) & (points < self.upper), axis=-1)


def ray_box(origin, direction, room: BoxRoom) -> tuple[np.ndarray, np.ndarray]:
    """
    Nearest wall hit by rays from a point inside the room.

    Args:
        origin: (..., 3) ray origins, strictly inside the room.
        direction: (..., 3) unit directions.
        room: The box.

    Returns:
        Ranges (...,) and wall ids (...,).
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if not np.all(room.contains(origin)):
        raise DomainError("ray origin outside the room")
    normals, offsets = room.normals, room.offsets
    distance = np.einsum("wj,...j->...w", normals, origin) + offsets
    approach = np.einsum("wj,...j->...w", normals, direction)
    with np.errstate(divide="ignore", invalid="ignore"):
        hit = np.where(approach < 0.0, -distance / approach, np.inf)
    wall = np.argmin(hit, axis=-1)
    ranges = np.take_along_axis(hit, wall[..., None], axis=-1)[..., 0]
    return ranges, wall


def fibonacci_directions(count: int) -> np.ndarray:
    """Evenly spread unit vectors on the sphere (golden-angle spiral)."""
    if count < 1:
        raise DomainError("need at least one ray direction")
    index = np.arange(count) + 0.5
    z = 1.0 - 2.0 * index / count
    radius = np.sqrt(1.0 - z * z)
    azimuth = np.pi * (3.0 - np.sqrt(5.0)) * index
    return np.stack([radius * np.cos(azimuth), radius * np.sin(azimuth), z], axis=-1)


def simulate_lidar(
    traj: PoseFunction,
    mount: MountSchedule,
    room: BoxRoom,
    rays_per_step: int,
    rate: float,
    sigma: float,
    seed: int,
    duration: float,
    lidar_id: int = 0,
    stream: tuple[int, ...] = (),
) -> LidarMeasurements:
    """
    Ray-trace the walls from the sensor pose at every tick k / rate < duration.

    Each tick casts the same sensor-frame directions; the noisy range is turned
    back into a point in the sensor frame and tagged with the wall it came from.

    Raises:
        SimulationError: when the sensor leaves the room.
    """
    if sigma < 0:
        raise DomainError("range noise must be non-negative")
    sensor = MountedTrajectory(traj, mount)
    ticks = np.arange(int(np.ceil(duration * rate - 1e-9))) / rate
    directions = fibonacci_directions(rays_per_step)
    pose = sensor.pose(ticks)

    outside = ~room.contains(pose.translation)
    if np.any(outside):
        raise SimulationError(f"lidar {lidar_id} left the room", t=float(ticks[np.argmax(outside)]))

    world_directions = np.einsum("tij,rj->tri", pose.rotation, directions)
    origins = np.broadcast_to(pose.translation[:, None, :], world_directions.shape)
    ranges, wall = ray_box(origins, world_directions, room)

    rng = rng_stream(seed, *stream, LIDAR_STREAM, lidar_id)
    noisy = ranges + sigma * rng.standard_normal(ranges.shape)
    points = noisy[..., None] * directions[None, :, :]

    count = ranges.size
    logger.debug(f"Simulated {count} lidar points for lidar {lidar_id} over {len(ticks)} ticks")
    return LidarMeasurements(
        t=np.repeat(ticks, rays_per_step),
        lidar=np.full(count, lidar_id, dtype=int),
        points=points.reshape(-1, 3),
        wall=wall.reshape(-1),
    )


__all__ = ["BoxRoom", "ray_box", "fibonacci_directions", "simulate_lidar", "WALL_NAMES", "LIDAR_STREAM"]
