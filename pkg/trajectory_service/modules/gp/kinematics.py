"""Global <-> local kinematic maps with their Jacobians.

A knot neighbourhood is described in local coordinates x = Log(a^-1 g) with
rates x_dot and x_ddot. The global rates follow from the right Jacobian,

    vel = Jr(x) x_dot
    acc = Jr(x) x_ddot + H(x, x_dot) x_dot                (closed form)
    acc = Jr(x) (x_ddot + 1/2 ad(vel) x_dot)              (approximated)

for x in so(3) (vel = omega) or se(3) (vel = tau = (omega, nu)). The same
functions serve both groups through the small adapters below.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from errors import KnotSpacingError
from modules.lie.derivatives import JR, JR_INV, AngleCache
from modules.lie.se3 import (
    Pose3,
    _h_blocks,
    _l_blocks,
    _q_matrix,
    _qpw,
    _qw,
    blocks,
    se3_adjoint,
    se3_curly,
    se3_exp,
    se3_log,
    split,
)
from modules.lie.so3 import hat, so3_exp, so3_log, transpose
from schemas.trajectory_types import KinematicsMode

# Relative knot rotations closer than this to a half turn are rejected
HALF_TURN_MARGIN = 1e-6

Element = Union[np.ndarray, Pose3]


def mv(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", matrix, vector)


class SO3Group:
    dim = 3

    @staticmethod
    def point(x: np.ndarray):
        return AngleCache(x)

    @staticmethod
    def between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return so3_log(transpose(a) @ b)

    @staticmethod
    def retract(a: np.ndarray, x: np.ndarray) -> np.ndarray:
        return a @ so3_exp(x)

    @staticmethod
    def jr(p) -> np.ndarray:
        return JR.matrix(p)

    @staticmethod
    def jr_inv(p) -> np.ndarray:
        return JR_INV.matrix(p)

    @staticmethod
    def h(p, v: np.ndarray, primed: bool = False) -> np.ndarray:
        return (JR_INV if primed else JR).jacobian(p, v)

    @staticmethod
    def l_maps(p, w: np.ndarray, v: np.ndarray, primed: bool = False) -> tuple[np.ndarray, np.ndarray]:
        base = JR_INV if primed else JR
        return base.jacobian(p, w, [v]), base.jacobian_wrt_y(p, [v])

    @staticmethod
    def ad(v: np.ndarray) -> np.ndarray:
        return hat(v)

    @staticmethod
    def exp_neg_adjoint(x: np.ndarray) -> np.ndarray:
        return transpose(so3_exp(x))

    @staticmethod
    def angle(x: np.ndarray) -> np.ndarray:
        return np.linalg.norm(x, axis=-1)


@dataclass(slots=True)
class _Se3Point:
    cache: AngleCache
    rho: np.ndarray


class SE3Group:
    dim = 6

    @staticmethod
    def point(x: np.ndarray) -> _Se3Point:
        theta, rho = split(x)
        return _Se3Point(AngleCache(theta), rho)

    @staticmethod
    def between(a: Pose3, b: Pose3) -> np.ndarray:
        return se3_log(a.inverse().compose(b))

    @staticmethod
    def retract(a: Pose3, x: np.ndarray) -> Pose3:
        return a.compose(se3_exp(x))

    @staticmethod
    def jr(p: _Se3Point) -> np.ndarray:
        jr = JR.matrix(p.cache)
        return blocks(jr, _q_matrix(p.cache, p.rho, _qw), jr)

    @staticmethod
    def jr_inv(p: _Se3Point) -> np.ndarray:
        jr_inv = JR_INV.matrix(p.cache)
        return blocks(jr_inv, _q_matrix(p.cache, p.rho, _qpw), jr_inv)

    @staticmethod
    def h(p: _Se3Point, v: np.ndarray, primed: bool = False) -> np.ndarray:
        if primed:
            return _h_blocks(p.cache, p.rho, v, JR_INV, _qpw)
        return _h_blocks(p.cache, p.rho, v, JR, _qw)

    @staticmethod
    def l_maps(p: _Se3Point, w: np.ndarray, v: np.ndarray, primed: bool = False) -> tuple[np.ndarray, np.ndarray]:
        maps = _l_blocks(p.cache, p.rho, w, v, JR_INV, _qpw) if primed else _l_blocks(p.cache, p.rho, w, v, JR, _qw)
        return maps.l11, maps.l12

    @staticmethod
    def ad(v: np.ndarray) -> np.ndarray:
        return se3_curly(v)

    @staticmethod
    def exp_neg_adjoint(x: np.ndarray) -> np.ndarray:
        return se3_adjoint(se3_exp(-np.asarray(x, dtype=float)))

    @staticmethod
    def angle(x: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(x)[..., :3], axis=-1)


Group = Union[type[SO3Group], type[SE3Group]]


@dataclass(slots=True)
class LocalState:
    x: np.ndarray
    x_dot: np.ndarray
    x_ddot: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x, self.x_dot, self.x_ddot], axis=-1)

    @classmethod
    def from_stacked(cls, stacked: np.ndarray, dim: int) -> "LocalState":
        return cls(stacked[..., :dim], stacked[..., dim : 2 * dim], stacked[..., 2 * dim :])


def _check_spacing(group: Group, x: np.ndarray) -> None:
    angle = group.angle(x)
    if np.any(angle >= np.pi - HALF_TURN_MARGIN):
        raise KnotSpacingError(
            f"relative knot rotation of {float(np.max(angle)):.6f} rad reaches a half turn; reduce the knot spacing"
        )


def rates_to_local(group: Group, x: np.ndarray, vel: np.ndarray, acc: np.ndarray, mode: KinematicsMode, with_jacobian: bool = False):
    """
    Local rates from global rates at local coordinate x.

    Returns:
        LocalState and, if requested, d(x, x_dot, x_ddot)/d(x, vel, acc) of shape (..., 3d, 3d).
    """
    p = group.point(x)
    jr_inv = group.jr_inv(p)
    x_dot = mv(jr_inv, vel)
    if mode == KinematicsMode.CLOSED_FORM:
        hp_vel = group.h(p, vel, primed=True)
        x_ddot = mv(jr_inv, acc) + mv(hp_vel, x_dot)
    else:
        ad_vel = group.ad(vel)
        x_ddot = mv(jr_inv, acc) - 0.5 * mv(ad_vel, x_dot)
    local = LocalState(np.asarray(x, dtype=float), x_dot, x_ddot)
    if not with_jacobian:
        return local, None

    d = group.dim
    hp_acc = group.h(p, acc, primed=True)
    if mode == KinematicsMode.CLOSED_FORM:
        l11p, l12p = group.l_maps(p, vel, x_dot, primed=True)
        d_x = hp_acc + l11p + hp_vel @ hp_vel
        d_vel = l12p + hp_vel @ jr_inv
    else:
        hp_vel = group.h(p, vel, primed=True)
        d_x = hp_acc - 0.5 * ad_vel @ hp_vel
        d_vel = 0.5 * group.ad(x_dot) - 0.5 * ad_vel @ jr_inv

    shape = np.broadcast_shapes(jr_inv.shape, d_x.shape)[:-2]
    jac = np.zeros(shape + (3 * d, 3 * d))
    jac[..., :d, :d] = np.eye(d)
    jac[..., d : 2 * d, :d] = hp_vel
    jac[..., d : 2 * d, d : 2 * d] = jr_inv
    jac[..., 2 * d :, :d] = d_x
    jac[..., 2 * d :, d : 2 * d] = d_vel
    jac[..., 2 * d :, 2 * d :] = jr_inv
    return local, jac


def local_to_rates(group: Group, local: LocalState, mode: KinematicsMode, with_jacobian: bool = False):
    """
    Global rates from local state.

    Returns:
        (vel, acc) and, if requested, d(vel, acc)/d(x, x_dot, x_ddot) of shape (..., 2d, 3d)
        together with Jr(x).
    """
    p = group.point(local.x)
    jr = group.jr(p)
    vel = mv(jr, local.x_dot)
    h_dot = group.h(p, local.x_dot)
    if mode == KinematicsMode.CLOSED_FORM:
        acc = mv(jr, local.x_ddot) + mv(h_dot, local.x_dot)
    else:
        y = local.x_ddot + 0.5 * mv(group.ad(vel), local.x_dot)
        acc = mv(jr, y)
    if not with_jacobian:
        return vel, acc, None, jr

    d = group.dim
    if mode == KinematicsMode.CLOSED_FORM:
        l11, l12 = group.l_maps(p, local.x_dot, local.x_dot)
        d_x = group.h(p, local.x_ddot) + l11
        d_xdot = h_dot + l12
    else:
        ad_xdot = group.ad(local.x_dot)
        d_x = group.h(p, y) - 0.5 * jr @ ad_xdot @ h_dot
        d_xdot = 0.5 * jr @ (group.ad(vel) - ad_xdot @ jr)

    shape = np.broadcast_shapes(jr.shape, d_x.shape)[:-2]
    jac = np.zeros(shape + (2 * d, 3 * d))
    jac[..., :d, :d] = h_dot
    jac[..., :d, d : 2 * d] = jr
    jac[..., d:, :d] = d_x
    jac[..., d:, d : 2 * d] = d_xdot
    jac[..., d:, 2 * d :] = jr
    return vel, acc, jac, jr


def local_from_global(group: Group, a: Element, b: Element, vel_b, acc_b, mode: KinematicsMode, with_jacobian: bool = False):
    """
    Local state of knot b relative to element a.

    Returns:
        LocalState and, if requested, the (..., 3d, 4d) Jacobian with respect to
        (a, b, vel_b, acc_b), right-plus on the group elements.
    """
    x = group.between(a, b)
    _check_spacing(group, x)
    local, inner = rates_to_local(group, x, vel_b, acc_b, mode, with_jacobian)
    if not with_jacobian:
        return local, None
    d = group.dim
    p = group.point(x)
    dx_db = group.jr_inv(p)
    dx_da = -group.jr_inv(group.point(-x))
    jac = np.concatenate(
        [inner[..., :d] @ dx_da, inner[..., :d] @ dx_db, inner[..., d:]],
        axis=-1,
    )
    return local, jac


def global_from_local(group: Group, a: Element, local: LocalState, mode: KinematicsMode, with_jacobian: bool = False):
    """
    Global state at local state `local` around element a.

    Returns:
        (element, vel, acc) and, if requested, (d/da of shape (..., 3d, d),
        d/d(x, x_dot, x_ddot) of shape (..., 3d, 3d)).
    """
    element = group.retract(a, local.x)
    vel, acc, rates_jac, jr = local_to_rates(group, local, mode, with_jacobian)
    if not with_jacobian:
        return element, vel, acc, None
    d = group.dim
    shape = rates_jac.shape[:-2]
    d_local = np.zeros(shape + (3 * d, 3 * d))
    d_local[..., :d, :d] = jr
    d_local[..., d:, :] = rates_jac
    d_a = np.zeros(shape + (3 * d, d))
    d_a[..., :d, :] = group.exp_neg_adjoint(local.x)
    return element, vel, acc, (d_a, d_local)


# Public per-group entry points


def local_from_global_so3(rotation_a, rotation_b, omega_b, alpha_b, mode: KinematicsMode = KinematicsMode.CLOSED_FORM):
    local, _ = local_from_global(SO3Group, np.asarray(rotation_a, float), np.asarray(rotation_b, float), omega_b, alpha_b, mode)
    return local.x, local.x_dot, local.x_ddot


def global_from_local_so3(rotation_a, theta, theta_dot, theta_ddot, mode: KinematicsMode = KinematicsMode.CLOSED_FORM):
    local = LocalState(np.asarray(theta, float), np.asarray(theta_dot, float), np.asarray(theta_ddot, float))
    rotation, omega, alpha, _ = global_from_local(SO3Group, np.asarray(rotation_a, float), local, mode)
    return rotation, omega, alpha


def local_from_global_se3(pose_a: Pose3, pose_b: Pose3, tau_b, tau_dot_b, mode: KinematicsMode = KinematicsMode.CLOSED_FORM):
    local, _ = local_from_global(SE3Group, pose_a, pose_b, tau_b, tau_dot_b, mode)
    return local.x, local.x_dot, local.x_ddot


def global_from_local_se3(pose_a: Pose3, xi, xi_dot, xi_ddot, mode: KinematicsMode = KinematicsMode.CLOSED_FORM):
    local = LocalState(np.asarray(xi, float), np.asarray(xi_dot, float), np.asarray(xi_ddot, float))
    pose, tau, tau_dot, _ = global_from_local(SE3Group, pose_a, local, mode)
    return pose, tau, tau_dot


__all__ = [
    "SO3Group",
    "SE3Group",
    "LocalState",
    "rates_to_local",
    "local_to_rates",
    "local_from_global",
    "global_from_local",
    "local_from_global_so3",
    "global_from_local_so3",
    "local_from_global_se3",
    "global_from_local_se3",
]
