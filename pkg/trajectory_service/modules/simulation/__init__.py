from .ground_truth import GtTrajectory, MountedTrajectory, MountSchedule, PoseFunction, gt_pose, mount_pose
from .lidar import BoxRoom, fibonacci_directions, ray_box, simulate_lidar
from .measurement_io import load_measurements, measurements_to_text, parse_measurements, save_measurements
from .uwb import simulate_uwb, uwb_ticks

__all__ = [
    "GtTrajectory",
    "MountedTrajectory",
    "MountSchedule",
    "PoseFunction",
    "gt_pose",
    "mount_pose",
    "BoxRoom",
    "fibonacci_directions",
    "ray_box",
    "simulate_lidar",
    "load_measurements",
    "measurements_to_text",
    "parse_measurements",
    "save_measurements",
    "simulate_uwb",
    "uwb_ticks",
]
