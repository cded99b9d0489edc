"""Line-oriented measurement dumps: `RANGE t tag anchor d` and `LIDAR t lidar x y z wall`."""
from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from errors import TrajectoryError
from logger_config import logger
from modules.utils import save_text
from schemas.measurements import LidarMeasurements, MeasurementSet, RangeMeasurements


def measurements_to_text(measurements: MeasurementSet) -> str:
    lines = []
    for m in measurements.ranges:
        lines.append(f"RANGE {m.t:.17g} {m.tag} {m.anchor} {m.d:.17g}")
    for m in measurements.lidar:
        x, y, z = m.point
        lines.append(f"LIDAR {m.t:.17g} {m.lidar} {x:.17g} {y:.17g} {z:.17g} {m.wall}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_measurements(measurements: MeasurementSet, path: Union[str, Path]):
    return save_text(measurements_to_text(measurements), Path(path))


def parse_measurements(text: str, source: str = "<string>") -> MeasurementSet:
    ranges: list[tuple[float, int, int, float]] = []
    points: list[tuple[float, int, float, float, float, int]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields or fields[0].startswith("#"):
            continue
        try:
            if fields[0] == "RANGE" and len(fields) == 5:
                ranges.append((float(fields[1]), int(fields[2]), int(fields[3]), float(fields[4])))
            elif fields[0] == "LIDAR" and len(fields) == 7:
                points.append(
                    (float(fields[1]), int(fields[2]), float(fields[3]), float(fields[4]), float(fields[5]), int(fields[6]))
                )
            else:
                raise ValueError(f"unknown record '{fields[0]}' with {len(fields)} fields")
        except ValueError as exc:
            raise TrajectoryError(f"{source}:{number}: {exc}") from exc

    measurements = MeasurementSet()
    if ranges:
        t, tag, anchor, d = zip(*ranges)
        measurements.ranges = RangeMeasurements(np.array(t), np.array(tag, dtype=int), np.array(anchor, dtype=int), np.array(d))
    if points:
        t, lidar, x, y, z, wall = zip(*points)
        measurements.lidar = LidarMeasurements(
            np.array(t), np.array(lidar, dtype=int), np.stack([x, y, z], axis=-1), np.array(wall, dtype=int)
        )
    return measurements


def load_measurements(path: Union[str, Path]) -> MeasurementSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TrajectoryError(f"Cannot read measurement file {path}: {exc}") from exc
    measurements = parse_measurements(text, source=str(path))
    logger.debug(f"Loaded {len(measurements)} measurements from {path}")
    return measurements


__all__ = ["measurements_to_text", "save_measurements", "parse_measurements", "load_measurements"]
