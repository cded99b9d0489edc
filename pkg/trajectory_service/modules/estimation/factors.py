"""Residual factors with analytic Jacobians.

Every factor is a batch of same-kind residuals. `evaluate` returns residuals
already whitened by the factor's square-root information, so the solver only
sees 1/2 sum ||r||^2. Knot Jacobians are emitted as one 36-wide block per
residual starting at the left knot of its interval (knots k and k+1 are
adjacent columns in the layout).
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import block_diag, cholesky, solve_triangular

from errors import DomainError
from logger_config import logger
from modules.estimation.state import ColumnLayout, EstimationState
from modules.gp.kinematics import mv
from modules.gp.trajectory import GpTrajectory
from modules.lie.se3 import Pose3, jr_inv_se3, se3_log
from modules.lie.so3 import hat, jr_inv_so3, so3_log
from schemas.trajectory_types import STATE_DIM, PoseRepr

# Predicted ranges below this are treated as degenerate and skipped
MIN_RANGE = 1e-9
_UNIT_TOLERANCE = 1e-9

ROTATION = slice(0, 3)
POSITION = slice(9, 12)


@dataclass(slots=True)
class JacobianBlock:
    columns: np.ndarray  # (n,) first column of the block in the full layout
    values: np.ndarray  # (n, r, w)


@dataclass(slots=True)
class FactorTerms:
    residual: np.ndarray  # (n, r), whitened
    blocks: list[JacobianBlock] = field(default_factory=list)


class Factor(ABC):
    kind: str = "factor"
    dim: int = 1
    # Measurement factors take the robust loss, priors stay quadratic
    robust: bool = False

    @abstractmethod
    def __len__(self) -> int: ...

    @abstractmethod
    def evaluate(self, state: EstimationState, layout: ColumnLayout, with_jacobian: bool = True) -> FactorTerms: ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={len(self)})"


def _unique_times(times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    unique, inverse = np.unique(times, return_inverse=True)
    return unique, inverse.reshape(-1)


def _pose_row(d_rotation: np.ndarray, d_position: np.ndarray) -> np.ndarray:
    """Scalar residual gradient with respect to an interpolated state, (n, 1, 18)."""
    row = np.zeros((len(d_rotation), 1, STATE_DIM))
    row[:, 0, ROTATION] = d_rotation
    row[:, 0, POSITION] = d_position
    return row


# Motion prior


def prior_covariance(traj: GpTrajectory) -> np.ndarray:
    """Covariance of the 18-dimensional local-state residual of one interval."""
    q = traj.kernel.process_cov
    if traj.pose_repr == PoseRepr.SE3:
        return np.kron(q, block_diag(traj.sigma_gamma, traj.sigma_nu))
    return block_diag(np.kron(q, traj.sigma_gamma), np.kron(q, traj.sigma_nu))


def prior_whitener(traj: GpTrajectory) -> np.ndarray:
    """L^-1 with L L^T the prior covariance."""
    lower = cholesky(prior_covariance(traj), lower=True)
    return solve_triangular(lower, np.eye(STATE_DIM), lower=True)


class MotionPriorFactor(Factor):
    """r = L_b - (F lifted) L_a on the local states of each interval."""

    kind = "motion_prior"
    dim = STATE_DIM

    def __init__(self, traj_id: int, intervals) -> None:
        self.traj_id = traj_id
        self.intervals = np.atleast_1d(np.asarray(intervals, dtype=int))

    def __len__(self) -> int:
        return len(self.intervals)

    def evaluate(self, state: EstimationState, layout: ColumnLayout, with_jacobian: bool = True) -> FactorTerms:
        traj = state.trajectories[self.traj_id]
        pair = traj.interval_locals(self.intervals, with_jacobian)
        transition = traj.levels(traj.kernel.transition)
        whitener = prior_whitener(traj)
        residual = mv(whitener, pair.local_b - mv(transition, pair.local_a))
        terms = FactorTerms(residual)
        if with_jacobian:
            values = np.concatenate([pair.jac_b_a - transition @ pair.jac_a_a, pair.jac_b_b], axis=-1)
            terms.blocks.append(JacobianBlock(layout.knot(self.traj_id, self.intervals), whitener @ values))
        return terms


def motion_prior_factor(traj_id: int, k: int) -> MotionPriorFactor:
    return MotionPriorFactor(traj_id, [k])


def motion_prior_factors(traj_id: int, traj: GpTrajectory, first: int = 0) -> Optional[MotionPriorFactor]:
    """Priors on every interval from `first` to the end of the trajectory."""
    intervals = np.arange(max(first, 0), traj.num_knots - 1)
    return MotionPriorFactor(traj_id, intervals) if len(intervals) else None


# UWB ranging


class UwbFactor(Factor):
    """r = ||R_t x_tag + p_t - anchor|| - d, weighted by 1/sigma."""

    kind = "uwb"
    robust = True

    def __init__(self, traj_id: int, times, tag_offsets, anchors, ranges, sigma) -> None:
        self.traj_id = traj_id
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        n = len(self.times)
        self.tag_offsets = np.broadcast_to(np.asarray(tag_offsets, dtype=float), (n, 3))
        self.anchors = np.broadcast_to(np.asarray(anchors, dtype=float), (n, 3))
        self.ranges = np.broadcast_to(np.asarray(ranges, dtype=float), (n,))
        self.sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n,))
        if np.any(self.sigma <= 0):
            raise DomainError("range noise must be positive")
        self._unique, self._inverse = _unique_times(self.times)
        self._warned = False

    def __len__(self) -> int:
        return len(self.times)

    def evaluate(self, state: EstimationState, layout: ColumnLayout, with_jacobian: bool = True) -> FactorTerms:
        interp = state.trajectories[self.traj_id].interpolate(self._unique, with_jacobian)
        idx = self._inverse
        rotation = interp.rotation[idx]
        lever = mv(rotation, self.tag_offsets)
        diff = lever + interp.position[idx] - self.anchors
        distance = np.linalg.norm(diff, axis=-1)
        degenerate = distance < MIN_RANGE
        if np.any(degenerate) and not self._warned:
            logger.warning(f"Skipping {int(degenerate.sum())} UWB residuals with a degenerate predicted range")
            self._warned = True
        residual = np.where(degenerate, 0.0, (distance - self.ranges) / self.sigma)[:, None]
        terms = FactorTerms(residual)
        if with_jacobian:
            unit = diff / np.where(degenerate, 1.0, distance)[:, None]
            unit[degenerate] = 0.0
            d_rotation = -np.einsum("ni,nij->nj", unit, rotation @ hat(self.tag_offsets))
            row = _pose_row(d_rotation, unit) / self.sigma[:, None, None]
            k = interp.knot_index[idx]
            terms.blocks.append(JacobianBlock(layout.knot(self.traj_id, k), row @ interp.jacobian[idx]))
        return terms


def uwb_factor(traj_id: int, t: float, tag_offset, anchor, d: float, sigma: float) -> UwbFactor:
    return UwbFactor(traj_id, [t], tag_offset, anchor, [d], sigma)


# Lidar point-to-plane


class PointToPlaneFactor(Factor):
    """
    r = n^T (R_t (T_e p) + p_t) + c, weighted by 1/sigma.

    T_e is either a fixed Pose3 (identity when the trajectory is the sensor's own)
    or an estimated extrinsic block addressed by index.
    """

    kind = "point2plane"
    robust = True

    def __init__(
        self,
        traj_id: int,
        times,
        points,
        normals,
        offsets,
        sigma,
        extrinsic: Union[Pose3, int, None] = None,
    ) -> None:
        self.traj_id = traj_id
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        n = len(self.times)
        self.points = np.broadcast_to(np.asarray(points, dtype=float), (n, 3))
        self.normals = np.broadcast_to(np.asarray(normals, dtype=float), (n, 3))
        self.offsets = np.broadcast_to(np.asarray(offsets, dtype=float), (n,))
        self.sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n,))
        if np.any(np.abs(np.linalg.norm(self.normals, axis=-1) - 1.0) > _UNIT_TOLERANCE):
            raise DomainError("plane normals must be unit vectors")
        if np.any(self.sigma <= 0):
            raise DomainError("point noise must be positive")
        self.extrinsic_id = extrinsic if isinstance(extrinsic, (int, np.integer)) else None
        self.fixed_extrinsic = None if self.extrinsic_id is not None else (extrinsic or Pose3.identity())
        self._unique, self._inverse = _unique_times(self.times)

    def __len__(self) -> int:
        return len(self.times)

    def evaluate(self, state: EstimationState, layout: ColumnLayout, with_jacobian: bool = True) -> FactorTerms:
        extrinsic = self.fixed_extrinsic if self.extrinsic_id is None else state.extrinsics[self.extrinsic_id]
        interp = state.trajectories[self.traj_id].interpolate(self._unique, with_jacobian)
        idx = self._inverse
        rotation = interp.rotation[idx]
        body = extrinsic.act(self.points)
        world = mv(rotation, body) + interp.position[idx]
        residual = ((np.einsum("ni,ni->n", self.normals, world) + self.offsets) / self.sigma)[:, None]
        terms = FactorTerms(residual)
        if not with_jacobian:
            return terms

        weight = 1.0 / self.sigma[:, None]
        n_rot = np.einsum("ni,nij->nj", self.normals, rotation)
        d_rotation = -np.einsum("nj,njk->nk", n_rot, hat(body))
        row = _pose_row(d_rotation, self.normals) * weight[:, :, None]
        k = interp.knot_index[idx]
        terms.blocks.append(JacobianBlock(layout.knot(self.traj_id, k), row @ interp.jacobian[idx]))
        if self.extrinsic_id is not None:
            # T_e Exp(d): d(T_e p) = [-R_e p^, R_e] d
            n_rot_e = n_rot @ extrinsic.rotation
            d_ext = np.concatenate([-np.einsum("nj,njk->nk", n_rot_e, hat(self.points)), n_rot_e], axis=-1)
            columns = np.full(len(self), layout.extrinsic(self.extrinsic_id))
            terms.blocks.append(JacobianBlock(columns, (d_ext * weight)[:, None, :]))
        return terms


def point2plane_factor(
    traj_id: int,
    t: float,
    p_body,
    normal,
    c: float,
    sigma: float,
    extrinsic: Union[Pose3, int, None] = None,
) -> PointToPlaneFactor:
    return PointToPlaneFactor(traj_id, [t], p_body, normal, [c], sigma, extrinsic)


# Extrinsic prior


class ExtrinsicPriorFactor(Factor):
    """r = Log(T_prior^-1 T_est) with information W."""

    kind = "extrinsic_prior"
    dim = 6

    def __init__(self, extrinsic_id: int, prior: Pose3, information) -> None:
        self.extrinsic_id = extrinsic_id
        self.prior = Pose3(np.asarray(prior.rotation, float).copy(), np.asarray(prior.translation, float).copy())
        information = np.asarray(information, dtype=float)
        if information.ndim == 0:
            information = information * np.eye(6)
        self.sqrt_information = cholesky(information, lower=True).T

    def __len__(self) -> int:
        return 1

    def evaluate(self, state: EstimationState, layout: ColumnLayout, with_jacobian: bool = True) -> FactorTerms:
        error = se3_log(self.prior.inverse().compose(state.extrinsics[self.extrinsic_id]))
        terms = FactorTerms((self.sqrt_information @ error)[None])
        if with_jacobian:
            values = (self.sqrt_information @ jr_inv_se3(error))[None]
            terms.blocks.append(JacobianBlock(np.array([layout.extrinsic(self.extrinsic_id)]), values))
        return terms


def extrinsic_prior_factor(extrinsic_id: int, prior: Pose3, information) -> ExtrinsicPriorFactor:
    return ExtrinsicPriorFactor(extrinsic_id, prior, information)


# Knot pose prior


class KnotPriorFactor(Factor):
    """
    r = (Log(R_prior^T R_k) / rot_sigma, (p_k - p_prior) / pos_sigma) on one knot.

    Pins the gauge of problems whose measurements leave a direction of the
    whole trajectory free, such as the roll about a two-tag UWB baseline.
    """

    kind = "knot_prior"
    dim = 6

    def __init__(self, traj_id: int, knot: int, rotation, position, rot_sigma: float, pos_sigma: float) -> None:
        if rot_sigma <= 0 or pos_sigma <= 0:
            raise DomainError("knot prior sigmas must be positive")
        self.traj_id = traj_id
        self.knot = int(knot)
        self.rotation = np.asarray(rotation, dtype=float).copy()
        self.position = np.asarray(position, dtype=float).copy()
        self.weights = np.repeat([1.0 / rot_sigma, 1.0 / pos_sigma], 3)

    def __len__(self) -> int:
        return 1

    def evaluate(self, state: EstimationState, layout: ColumnLayout, with_jacobian: bool = True) -> FactorTerms:
        traj = state.trajectories[self.traj_id]
        rotation_error = so3_log(self.rotation.T @ traj.rotation[self.knot])
        error = np.concatenate([rotation_error, traj.position[self.knot] - self.position])
        terms = FactorTerms((self.weights * error)[None])
        if with_jacobian:
            values = np.zeros((1, 6, STATE_DIM))
            values[0, 0:3, ROTATION] = jr_inv_so3(rotation_error)
            values[0, 3:6, POSITION] = np.eye(3)
            values *= self.weights[None, :, None]
            columns = np.atleast_1d(layout.knot(self.traj_id, self.knot))
            terms.blocks.append(JacobianBlock(columns, values))
        return terms


def knot_prior_factor(
    traj_id: int, traj: GpTrajectory, knot: int = 0, rot_sigma: float = 1.0, pos_sigma: float = 1.0
) -> KnotPriorFactor:
    """Prior holding a knot's pose at its current value."""
    return KnotPriorFactor(traj_id, knot, traj.rotation[knot], traj.position[knot], rot_sigma, pos_sigma)


__all__ = [
    "Factor",
    "FactorTerms",
    "JacobianBlock",
    "MotionPriorFactor",
    "UwbFactor",
    "PointToPlaneFactor",
    "ExtrinsicPriorFactor",
    "KnotPriorFactor",
    "motion_prior_factor",
    "motion_prior_factors",
    "uwb_factor",
    "point2plane_factor",
    "extrinsic_prior_factor",
    "knot_prior_factor",
    "prior_covariance",
    "prior_whitener",
]
