from __future__ import annotations

import numpy as np

from errors import DomainError
from logger_config import logger
from modules.simulation.ground_truth import PoseFunction
from modules.utils import rng_stream
from schemas.measurements import RangeMeasurements

UWB_STREAM = 1


def uwb_ticks(period: float, duration: float) -> np.ndarray:
    return np.arange(int(np.ceil(duration / period - 1e-9))) * period


def simulate_uwb(
    traj: PoseFunction,
    anchors,
    tag_offsets,
    period: float,
    sigma: float,
    seed: int,
    duration: float,
    stream: tuple[int, ...] = (),
) -> RangeMeasurements:
    """
    One range per (tag, anchor) at every tick k * period < duration.

    Noise for each (tag, anchor) pair comes from its own stream, so adding a
    tag or an anchor leaves the other pairs' noise unchanged.
    """
    if sigma < 0:
        raise DomainError("range noise must be non-negative")
    anchors = np.asarray(anchors, dtype=float).reshape(-1, 3)
    tag_offsets = np.asarray(tag_offsets, dtype=float).reshape(-1, 3)
    ticks = uwb_ticks(period, duration)
    pose = traj.pose(ticks)

    columns = {"t": [], "tag": [], "anchor": [], "d": []}
    for tag, offset in enumerate(tag_offsets):
        tag_world = pose.act(offset)
        for anchor_id, anchor in enumerate(anchors):
            rng = rng_stream(seed, *stream, UWB_STREAM, tag, anchor_id)
            distance = np.linalg.norm(tag_world - anchor, axis=-1)
            columns["t"].append(ticks)
            columns["tag"].append(np.full(len(ticks), tag, dtype=int))
            columns["anchor"].append(np.full(len(ticks), anchor_id, dtype=int))
            columns["d"].append(distance + sigma * rng.standard_normal(len(ticks)))

    merged = {key: np.concatenate(values) for key, values in columns.items()}
    # Time-major order; ties keep (tag, anchor) order
    order = np.argsort(merged["t"], kind="stable")
    logger.debug(f"Simulated {len(order)} UWB ranges ({len(tag_offsets)} tags x {len(anchors)} anchors)")
    return RangeMeasurements(**{key: value[order] for key, value in merged.items()})


__all__ = ["simulate_uwb", "uwb_ticks", "UWB_STREAM"]
