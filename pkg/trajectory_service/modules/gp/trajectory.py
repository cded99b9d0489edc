"""Third-order GP trajectory on uniformly spaced support states.

Knots are always stored in the unified layout (R, omega, alpha, p, v, a). A
pose representation decides how an interval is mapped to local coordinates:

    SO3xR3  rotation through Log(R_a^-1 R) with body rates, translation levels
            interpolated directly in the world frame
    SE3     the knot is reshuffled to (T, tau, tau_dot) with body twist
            tau = (omega, R^T v) and handled through Log(T_a^-1 T)

Both produce an 18-dimensional local state per knot, level-major, which the
Lambda/Psi gains blend and the motion prior compares.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from errors import DomainError
from logger_config import logger
from modules.gp.kernel import MotionKernel, kron_identity
from modules.gp.kinematics import SE3Group, SO3Group, LocalState, global_from_local, local_from_global, mv
from modules.lie.se3 import Pose3
from modules.lie.so3 import hat, so3_exp, transpose
from schemas.trajectory_types import STATE_DIM, InterpolatedState, KinematicsMode, PoseRepr, SupportState

DEFAULT_NOISE_DENSITY = 10.0
GP_ORDER = 3

NoiseDensity = Union[float, Sequence[float], np.ndarray]


def noise_density(value: Optional[NoiseDensity]) -> np.ndarray:
    """Scalar, diagonal or full 3x3 power spectral density as a matrix."""
    if value is None:
        value = DEFAULT_NOISE_DENSITY
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        matrix = value * np.eye(3)
    elif value.shape == (3,):
        matrix = np.diag(value)
    elif value.shape == (3, 3):
        matrix = 0.5 * (value + value.T)
    else:
        raise DomainError(f"noise density must be a scalar, 3-vector or 3x3 matrix, got shape {value.shape}")
    if np.any(np.linalg.eigvalsh(matrix) <= 0.0):
        raise DomainError("noise density must be positive definite")
    return matrix


@dataclass(slots=True)
class IntervalLocals:
    """Local states of the two knots of each interval, expressed at the left knot."""

    local_a: np.ndarray
    local_b: np.ndarray
    # d local / d knot (18 x 18), present when Jacobians are requested
    jac_a_a: Optional[np.ndarray] = None
    jac_b_a: Optional[np.ndarray] = None
    jac_b_b: Optional[np.ndarray] = None


@dataclass(slots=True)
class _GlobalStates:
    rotation: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    d_local: Optional[np.ndarray] = None
    d_knot: Optional[np.ndarray] = None


def twist_states(rotation, omega, alpha, velocity, acceleration, with_jacobian: bool = False):
    """
    Reshuffle unified knots into SE(3) rates.

    Returns:
        (tau, tau_dot) with tau = (omega, R^T v), tau_dot = (alpha, R^T a - omega x R^T v),
        and, if requested, d(T, tau, tau_dot)/d(R, omega, alpha, p, v, a) of shape (..., 18, 18).
    """
    rt = transpose(rotation)
    nu = mv(rt, velocity)
    body_acc = mv(rt, acceleration)
    beta = body_acc - np.cross(omega, nu)
    tau = np.concatenate([omega, nu], axis=-1)
    tau_dot = np.concatenate([alpha, beta], axis=-1)
    if not with_jacobian:
        return tau, tau_dot, None

    eye = np.eye(3)
    nu_hat, omega_hat = hat(nu), hat(omega)
    jac = np.zeros(rotation.shape[:-2] + (STATE_DIM, STATE_DIM))
    jac[..., 0:3, 0:3] = eye
    jac[..., 3:6, 9:12] = rt
    jac[..., 6:9, 3:6] = eye
    jac[..., 9:12, 0:3] = nu_hat
    jac[..., 9:12, 12:15] = rt
    jac[..., 12:15, 6:9] = eye
    jac[..., 15:18, 0:3] = hat(body_acc) - omega_hat @ nu_hat
    jac[..., 15:18, 3:6] = nu_hat
    jac[..., 15:18, 12:15] = -omega_hat @ rt
    jac[..., 15:18, 15:18] = rt
    return tau, tau_dot, jac


def unified_states(pose: Pose3, tau: np.ndarray, tau_dot: np.ndarray, with_jacobian: bool = False):
    """
    Inverse of `twist_states`.

    Returns:
        (R, omega, alpha, p, v, a) and, if requested, their Jacobian with respect to
        (T, tau, tau_dot) of shape (..., 18, 18).
    """
    rotation, position = pose.rotation, pose.translation
    omega, nu = tau[..., :3], tau[..., 3:]
    alpha, beta = tau_dot[..., :3], tau_dot[..., 3:]
    inner = beta + np.cross(omega, nu)
    velocity = mv(rotation, nu)
    acceleration = mv(rotation, inner)
    states = (rotation, omega, alpha, position, velocity, acceleration)
    if not with_jacobian:
        return states, None

    eye = np.eye(3)
    r_nu_hat = rotation @ hat(nu)
    jac = np.zeros(rotation.shape[:-2] + (STATE_DIM, STATE_DIM))
    jac[..., 0:3, 0:3] = eye
    jac[..., 3:6, 6:9] = eye
    jac[..., 6:9, 12:15] = eye
    jac[..., 9:12, 3:6] = rotation
    jac[..., 12:15, 0:3] = -r_nu_hat
    jac[..., 12:15, 9:12] = rotation
    jac[..., 15:18, 0:3] = -rotation @ hat(inner)
    jac[..., 15:18, 6:9] = -r_nu_hat
    jac[..., 15:18, 9:12] = rotation @ hat(omega)
    jac[..., 15:18, 15:18] = rotation
    return states, jac


def _diag_block(n: int, top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    out = np.zeros((n, STATE_DIM, STATE_DIM))
    out[:, :9, :9] = top
    out[:, 9:, 9:] = bottom
    return out


class _So3R3Layout:
    """Rotation through SO(3) local coordinates, translation levels in the world frame."""

    @staticmethod
    def levels(base: np.ndarray) -> np.ndarray:
        block = kron_identity(base, 3)
        out = np.zeros(block.shape[:-2] + (STATE_DIM, STATE_DIM))
        out[..., :9, :9] = block
        out[..., 9:, 9:] = block
        return out

    @staticmethod
    def local_at_knot(traj: "GpTrajectory", index: np.ndarray, with_jacobian: bool):
        local = np.concatenate(
            [np.zeros((len(index), 3)), traj.omega[index], traj.alpha[index], traj.position[index], traj.velocity[index], traj.acceleration[index]],
            axis=-1,
        )
        if not with_jacobian:
            return local, None
        selection = np.diag(np.r_[np.zeros(3), np.ones(STATE_DIM - 3)])
        return local, np.broadcast_to(selection, (len(index), STATE_DIM, STATE_DIM)).copy()

    @classmethod
    def local_pair(cls, traj: "GpTrajectory", a: np.ndarray, with_jacobian: bool) -> IntervalLocals:
        b = a + 1
        local_a, jac_a_a = cls.local_at_knot(traj, a, with_jacobian)
        rotation_local, jac = local_from_global(
            SO3Group, traj.rotation[a], traj.rotation[b], traj.omega[b], traj.alpha[b], traj.mode, with_jacobian
        )
        local_b = np.concatenate(
            [rotation_local.stacked(), traj.position[b], traj.velocity[b], traj.acceleration[b]], axis=-1
        )
        pair = IntervalLocals(local_a, local_b)
        if with_jacobian:
            n = len(a)
            jac_b_a = np.zeros((n, STATE_DIM, STATE_DIM))
            jac_b_a[:, :9, :3] = jac[..., 0:3]
            jac_b_b = np.zeros((n, STATE_DIM, STATE_DIM))
            jac_b_b[:, :9, :9] = jac[..., 3:12]
            jac_b_b[:, 9:, 9:] = np.eye(9)
            pair.jac_a_a, pair.jac_b_a, pair.jac_b_b = jac_a_a, jac_b_a, jac_b_b
        return pair

    @staticmethod
    def to_global(traj: "GpTrajectory", k: np.ndarray, local: np.ndarray, with_jacobian: bool) -> _GlobalStates:
        rotation, omega, alpha, jac = global_from_local(
            SO3Group, traj.rotation[k], LocalState.from_stacked(local[:, :9], 3), traj.mode, with_jacobian
        )
        states = _GlobalStates(rotation, omega, alpha, local[:, 9:12], local[:, 12:15], local[:, 15:18])
        if with_jacobian:
            d_a, d_local = jac
            n = len(k)
            states.d_local = _diag_block(n, d_local, np.eye(9))
            states.d_knot = np.zeros((n, STATE_DIM, STATE_DIM))
            states.d_knot[:, :9, :3] = d_a
        return states


class _Se3Layout:
    """Whole pose through SE(3) local coordinates after the twist reshuffle."""

    @staticmethod
    def levels(base: np.ndarray) -> np.ndarray:
        return kron_identity(base, 6)

    @staticmethod
    def _twists(traj: "GpTrajectory", index: np.ndarray, with_jacobian: bool):
        return twist_states(
            traj.rotation[index], traj.omega[index], traj.alpha[index], traj.velocity[index], traj.acceleration[index], with_jacobian
        )

    @classmethod
    def local_at_knot(cls, traj: "GpTrajectory", index: np.ndarray, with_jacobian: bool):
        tau, tau_dot, j10 = cls._twists(traj, index, with_jacobian)
        local = np.concatenate([np.zeros((len(index), 6)), tau, tau_dot], axis=-1)
        if not with_jacobian:
            return local, None
        jac = np.zeros_like(j10)
        jac[:, 6:] = j10[:, 6:]
        return local, jac

    @classmethod
    def local_pair(cls, traj: "GpTrajectory", a: np.ndarray, with_jacobian: bool) -> IntervalLocals:
        b = a + 1
        local_a, jac_a_a = cls.local_at_knot(traj, a, with_jacobian)
        tau_b, tau_dot_b, j10_b = cls._twists(traj, b, with_jacobian)
        local, jac = local_from_global(SE3Group, traj.pose(a), traj.pose(b), tau_b, tau_dot_b, traj.mode, with_jacobian)
        pair = IntervalLocals(local_a, local.stacked())
        if with_jacobian:
            pair.jac_a_a = jac_a_a
            pair.jac_b_a = jac[..., :6] @ _pose_rows(traj.rotation[a])
            pair.jac_b_b = jac[..., 6:] @ j10_b
        return pair

    @staticmethod
    def to_global(traj: "GpTrajectory", k: np.ndarray, local: np.ndarray, with_jacobian: bool) -> _GlobalStates:
        pose, tau, tau_dot, jac = global_from_local(
            SE3Group, traj.pose(k), LocalState.from_stacked(local, 6), traj.mode, with_jacobian
        )
        states, j54 = unified_states(pose, tau, tau_dot, with_jacobian)
        out = _GlobalStates(*states)
        if with_jacobian:
            d_a, d_local = jac
            out.d_local = j54 @ d_local
            out.d_knot = j54 @ d_a @ _pose_rows(traj.rotation[k])
        return out


def _pose_rows(rotation: np.ndarray) -> np.ndarray:
    """d T / d(R, omega, alpha, p, v, a): the first six rows of the twist reshuffle Jacobian."""
    out = np.zeros(rotation.shape[:-2] + (6, STATE_DIM))
    out[..., 0:3, 0:3] = np.eye(3)
    out[..., 3:6, 9:12] = transpose(rotation)
    return out


_LAYOUTS = {PoseRepr.SO3xR3: _So3R3Layout, PoseRepr.SE3: _Se3Layout}


class GpTrajectory:
    """
    White-noise-on-jerk trajectory with knots at t0 + k * dt.

    Readers (`interpolate`, `interval_locals`) may run concurrently; `extend_to`,
    `retract` and `set_knot` mutate the knot arrays and need exclusive access.
    """

    def __init__(
        self,
        t0: float,
        dt: float,
        knots: Sequence[SupportState],
        pose_repr: PoseRepr = PoseRepr.SO3xR3,
        mode: KinematicsMode = KinematicsMode.CLOSED_FORM,
        sigma_gamma: Optional[NoiseDensity] = None,
        sigma_nu: Optional[NoiseDensity] = None,
    ) -> None:
        if not dt > 0:
            raise DomainError(f"knot spacing must be positive, got {dt}")
        if len(knots) == 0:
            raise DomainError("a trajectory needs at least one knot")
        self.t0 = float(t0)
        self.dt = float(dt)
        self.pose_repr = PoseRepr(pose_repr)
        self.mode = KinematicsMode(mode)
        self.sigma_gamma = noise_density(sigma_gamma)
        self.sigma_nu = noise_density(sigma_nu)
        self.kernel = MotionKernel(self.dt, GP_ORDER)
        self._layout = _LAYOUTS[self.pose_repr]

        self.rotation = np.stack([np.asarray(k.rotation, dtype=float) for k in knots])
        self.omega = np.stack([np.asarray(k.omega, dtype=float) for k in knots])
        self.alpha = np.stack([np.asarray(k.alpha, dtype=float) for k in knots])
        self.position = np.stack([np.asarray(k.position, dtype=float) for k in knots])
        self.velocity = np.stack([np.asarray(k.velocity, dtype=float) for k in knots])
        self.acceleration = np.stack([np.asarray(k.acceleration, dtype=float) for k in knots])

    @classmethod
    def from_pose(cls, t0: float, dt: float, rotation, position, **kwargs) -> "GpTrajectory":
        """Single knot at rest; derivative states start at zero."""
        return cls(t0, dt, [SupportState.at_rest(rotation, position)], **kwargs)

    # Knot access

    @property
    def num_knots(self) -> int:
        return len(self.rotation)

    def __len__(self) -> int:
        return self.num_knots

    @property
    def knot_times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.num_knots)

    @property
    def end_time(self) -> float:
        return self.t0 + self.dt * (self.num_knots - 1)

    def knot(self, k: int) -> SupportState:
        return SupportState(
            self.rotation[k].copy(),
            self.omega[k].copy(),
            self.alpha[k].copy(),
            self.position[k].copy(),
            self.velocity[k].copy(),
            self.acceleration[k].copy(),
        )

    def set_knot(self, k: int, state: SupportState) -> None:
        self.rotation[k] = state.rotation
        self.omega[k] = state.omega
        self.alpha[k] = state.alpha
        self.position[k] = state.position
        self.velocity[k] = state.velocity
        self.acceleration[k] = state.acceleration

    def pose(self, index) -> Pose3:
        return Pose3(self.rotation[index], self.position[index])

    def copy(self) -> "GpTrajectory":
        other = GpTrajectory.__new__(GpTrajectory)
        other.t0, other.dt = self.t0, self.dt
        other.pose_repr, other.mode = self.pose_repr, self.mode
        other.sigma_gamma, other.sigma_nu = self.sigma_gamma.copy(), self.sigma_nu.copy()
        other.kernel, other._layout = self.kernel, self._layout
        for name in ("rotation", "omega", "alpha", "position", "velocity", "acceleration"):
            setattr(other, name, getattr(self, name).copy())
        return other

    def update_from(self, other: "GpTrajectory") -> None:
        """Take over the knot values of another trajectory with the same knots."""
        if other.num_knots != self.num_knots:
            raise DomainError(f"cannot copy {other.num_knots} knots into a trajectory with {self.num_knots}")
        for name in ("rotation", "omega", "alpha", "position", "velocity", "acceleration"):
            setattr(self, name, getattr(other, name).copy())

    def retract(self, increments: np.ndarray) -> None:
        """Apply per-knot 18-vectors: right-plus on R, additive on the other states."""
        delta = np.asarray(increments, dtype=float).reshape(self.num_knots, STATE_DIM)
        self.rotation = self.rotation @ so3_exp(delta[:, 0:3])
        self.omega = self.omega + delta[:, 3:6]
        self.alpha = self.alpha + delta[:, 6:9]
        self.position = self.position + delta[:, 9:12]
        self.velocity = self.velocity + delta[:, 12:15]
        self.acceleration = self.acceleration + delta[:, 15:18]

    # Interpolation

    def levels(self, base: np.ndarray) -> np.ndarray:
        """Lift an N x N level matrix (F, Lambda, Psi, Q) to the 18-dimensional local state."""
        return self._layout.levels(base)

    def locate(self, times) -> tuple[np.ndarray, np.ndarray]:
        """
        Interval index and offset of each query time.

        The end time belongs to the last interval with offset dt.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.num_knots < 2:
            raise DomainError("interpolation needs at least two knots")
        span = (self.num_knots - 1) * self.dt
        offset = times - self.t0
        tol = 1e-9 * self.dt
        if np.any(offset < -tol) or np.any(offset > span + tol):
            raise DomainError(
                f"query time outside the trajectory domain [{self.t0:.6f}, {self.end_time:.6f}]"
            )
        offset = np.clip(offset, 0.0, span)
        k = np.minimum(np.floor(offset / self.dt + tol / self.dt).astype(int), self.num_knots - 2)
        s = offset - k * self.dt
        s = np.where(np.abs(s) < tol, 0.0, s)
        s = np.where(np.abs(s - self.dt) < tol, self.dt, np.clip(s, 0.0, self.dt))
        return k, s

    def interval_locals(self, intervals, with_jacobian: bool = False) -> IntervalLocals:
        """Local states of knots k and k+1 expressed at knot k, for each interval k."""
        intervals = np.atleast_1d(np.asarray(intervals, dtype=int))
        if np.any(intervals < 0) or np.any(intervals > self.num_knots - 2):
            raise DomainError(f"interval index out of range for {self.num_knots} knots")
        return self._layout.local_pair(self, intervals, with_jacobian)

    def interpolate(self, times, with_jacobian: bool = False) -> InterpolatedState:
        """
        States at the query times with optional intrinsic Jacobians.

        Args:
            times: Scalar or 1-D array of times within [t0, end_time].
            with_jacobian: Also return d(state)/d(left knot, right knot), shape (M, 18, 36).

        Returns:
            InterpolatedState for all query times.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        k, s = self.locate(times)
        lam, psi = self.kernel.interpolation(s)
        intervals, inverse = np.unique(k, return_inverse=True)
        inverse = inverse.reshape(-1)
        pair = self._layout.local_pair(self, intervals, with_jacobian)

        lam_op, psi_op = self.levels(lam), self.levels(psi)
        local = mv(lam_op, pair.local_a[inverse]) + mv(psi_op, pair.local_b[inverse])
        out = self._layout.to_global(self, k, local, with_jacobian)

        jacobian = None
        if with_jacobian:
            jacobian = np.empty((len(times), STATE_DIM, 2 * STATE_DIM))
            jacobian[:, :, :STATE_DIM] = (
                out.d_local @ (lam_op @ pair.jac_a_a[inverse] + psi_op @ pair.jac_b_a[inverse]) + out.d_knot
            )
            jacobian[:, :, STATE_DIM:] = out.d_local @ psi_op @ pair.jac_b_b[inverse]
        return InterpolatedState(
            times=times,
            knot_index=k,
            rotation=out.rotation,
            omega=out.omega,
            alpha=out.alpha,
            position=out.position,
            velocity=out.velocity,
            acceleration=out.acceleration,
            jacobian=jacobian,
        )

    def extend_to(self, t: float) -> int:
        """
        Append knots propagated by the noise-free transition until t is covered.

        Returns:
            Number of knots appended.
        """
        target = int(np.ceil((t - self.t0) / self.dt - 1e-9)) + 1
        added = max(0, target - self.num_knots)
        transition = self.levels(self.kernel.transition)
        for _ in range(added):
            last = np.array([self.num_knots - 1])
            local, _ = self._layout.local_at_knot(self, last, False)
            out = self._layout.to_global(self, last, mv(transition, local), False)
            self.rotation = np.concatenate([self.rotation, out.rotation])
            self.omega = np.concatenate([self.omega, out.omega])
            self.alpha = np.concatenate([self.alpha, out.alpha])
            self.position = np.concatenate([self.position, out.position])
            self.velocity = np.concatenate([self.velocity, out.velocity])
            self.acceleration = np.concatenate([self.acceleration, out.acceleration])
        if added:
            logger.debug(f"Extended trajectory by {added} knots to t={self.end_time:.3f}s")
        return added

    def __repr__(self) -> str:
        return (
            f"GpTrajectory(repr={self.pose_repr.value}, mode={self.mode.value}, t0={self.t0:g}, "
            f"dt={self.dt:g}, knots={self.num_knots})"
        )


__all__ = [
    "GpTrajectory",
    "IntervalLocals",
    "noise_density",
    "twist_states",
    "unified_states",
    "DEFAULT_NOISE_DENSITY",
]
