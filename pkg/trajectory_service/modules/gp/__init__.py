from .kernel import MotionKernel, interp_matrices, kron_identity, process_cov, transition
from .kinematics import (
    LocalState,
    SE3Group,
    SO3Group,
    global_from_local,
    global_from_local_se3,
    global_from_local_so3,
    local_from_global,
    local_from_global_se3,
    local_from_global_so3,
)
from .serialization import load_trajectory, save_trajectory
from .trajectory import DEFAULT_NOISE_DENSITY, GpTrajectory, IntervalLocals, noise_density

__all__ = [
    "MotionKernel",
    "interp_matrices",
    "kron_identity",
    "process_cov",
    "transition",
    "LocalState",
    "SO3Group",
    "SE3Group",
    "global_from_local",
    "local_from_global",
    "global_from_local_so3",
    "local_from_global_so3",
    "global_from_local_se3",
    "local_from_global_se3",
    "load_trajectory",
    "save_trajectory",
    "GpTrajectory",
    "IntervalLocals",
    "noise_density",
    "DEFAULT_NOISE_DENSITY",
]
