"""SE(3) primitives in (theta, rho) order with the right-plus convention.

The coupling block of the right Jacobian is written as

    Q(theta, rho) = Exp(-theta) d[Jl(theta) rho]/d theta  ( = -Exp(-theta) H1(-theta, rho) )

and its inverse counterpart as Q'(theta, rho) = -Jr^-1 Q Jr^-1. Every S and C
block is a directional derivative of Q(theta, rho) w or Q'(theta, rho) w, taken by
the product rule over the Exp(-theta), Jl(theta) and Jr^-1(theta) factors.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from modules.lie.derivatives import EXP_NEG, JL, JR, JR_INV, AngleCache
from modules.lie.so3 import hat, so3_exp, so3_log, transpose

_BASIS = np.eye(3)


@dataclass(slots=True)
class Pose3:
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls, batch_shape: tuple[int, ...] = ()) -> "Pose3":
        return cls(np.broadcast_to(np.eye(3), batch_shape + (3, 3)).copy(), np.zeros(batch_shape + (3,)))

    @classmethod
    def from_matrix(cls, matrix) -> "Pose3":
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix[..., :3, :3].copy(), matrix[..., :3, 3].copy())

    def as_matrix(self) -> np.ndarray:
        shape = np.broadcast_shapes(self.rotation.shape[:-2], self.translation.shape[:-1])
        out = np.zeros(shape + (4, 4))
        out[..., :3, :3] = self.rotation
        out[..., :3, 3] = self.translation
        out[..., 3, 3] = 1.0
        return out

    def compose(self, other: "Pose3") -> "Pose3":
        return Pose3(self.rotation @ other.rotation, self.act(other.translation))

    def inverse(self) -> "Pose3":
        rt = transpose(self.rotation)
        return Pose3(rt, -np.einsum("...ij,...j->...i", rt, self.translation))

    def act(self, points) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.rotation, points) + self.translation

    def __getitem__(self, index) -> "Pose3":
        return Pose3(self.rotation[index], self.translation[index])


def split(xi) -> tuple[np.ndarray, np.ndarray]:
    xi = np.asarray(xi, dtype=float)
    return xi[..., :3], xi[..., 3:]


def se3_exp(xi) -> Pose3:
    theta, rho = split(xi)
    return Pose3(so3_exp(theta), JL.derivative(theta, rho))


def se3_log(pose: Pose3) -> np.ndarray:
    theta = so3_log(pose.rotation)
    rho = JR_INV.derivative(-theta, pose.translation)
    return np.concatenate([theta, rho], axis=-1)


def blocks(top_left, bottom_left, bottom_right) -> np.ndarray:
    """Assemble [[A, 0], [B, C]] from 3x3 blocks."""
    shape = np.broadcast_shapes(np.shape(top_left), np.shape(bottom_left), np.shape(bottom_right))
    out = np.zeros(shape[:-2] + (6, 6))
    out[..., :3, :3] = top_left
    out[..., 3:, :3] = bottom_left
    out[..., 3:, 3:] = bottom_right
    return out


def se3_adjoint(pose: Pose3) -> np.ndarray:
    rotation = pose.rotation
    return blocks(rotation, hat(pose.translation) @ rotation, rotation)


def se3_curly(xi) -> np.ndarray:
    theta, rho = split(xi)
    theta_hat = hat(theta)
    return blocks(theta_hat, hat(rho), theta_hat)


# Directional derivatives of Q(theta, rho) w and Q'(theta, rho) w along theta


def _qw(cache: AngleCache, rho, w, dirs: Sequence[np.ndarray]) -> np.ndarray:
    m = len(dirs)
    total = 0.0
    for size in range(m + 1):
        for chosen in combinations(range(m), size):
            outer_dirs = [dirs[i] for i in chosen]
            inner_dirs = [dirs[i] for i in range(m) if i not in chosen]
            inner = JL.derivative(cache, rho, [w, *inner_dirs])
            total = total + EXP_NEG.derivative(cache, inner, outer_dirs)
    return total


def _qpw(cache: AngleCache, rho, w, dirs: Sequence[np.ndarray]) -> np.ndarray:
    m = len(dirs)
    total = 0.0
    for assignment in product(range(3), repeat=m):
        group = [[dirs[i] for i in range(m) if assignment[i] == k] for k in range(3)]
        inner = JR_INV.derivative(cache, w, group[2])
        middle = _qw(cache, rho, inner, group[1])
        total = total - JR_INV.derivative(cache, middle, group[0])
    return total


QFunction = Callable[[AngleCache, np.ndarray, np.ndarray, Sequence[np.ndarray]], np.ndarray]


def _columns(fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return np.stack([fn(e) for e in _BASIS], axis=-1)


def _q_matrix(cache: AngleCache, rho, qfun: QFunction) -> np.ndarray:
    return _columns(lambda e: qfun(cache, rho, e, []))


def q_se3(xi) -> np.ndarray:
    theta, rho = split(xi)
    return _q_matrix(AngleCache(theta), rho, _qw)


def qp_se3(xi) -> np.ndarray:
    theta, rho = split(xi)
    return _q_matrix(AngleCache(theta), rho, _qpw)


def jr_se3(xi) -> np.ndarray:
    theta, rho = split(xi)
    cache = AngleCache(theta)
    jr = JR.matrix(cache)
    return blocks(jr, _q_matrix(cache, rho, _qw), jr)


def jr_inv_se3(xi) -> np.ndarray:
    theta, rho = split(xi)
    cache = AngleCache(theta)
    jr_inv = JR_INV.matrix(cache)
    return blocks(jr_inv, _q_matrix(cache, rho, _qpw), jr_inv)


@dataclass(slots=True)
class SBlocks:
    s1: np.ndarray
    s2: np.ndarray
    s1p: np.ndarray
    s2p: np.ndarray


def _s_pair(cache: AngleCache, rho, w, qfun: QFunction) -> tuple[np.ndarray, np.ndarray]:
    s1 = _columns(lambda e: qfun(cache, rho, w, [e]))
    s2 = _columns(lambda e: qfun(cache, e, w, []))
    return s1, s2


def s_blocks(xi, w) -> SBlocks:
    """S1 = d[Q(xi) w]/d theta, S2 = d[Q(xi) w]/d rho, and the Q' analogues."""
    theta, rho = split(xi)
    cache = AngleCache(theta)
    s1, s2 = _s_pair(cache, rho, w, _qw)
    s1p, s2p = _s_pair(cache, rho, w, _qpw)
    return SBlocks(s1, s2, s1p, s2p)


@dataclass(slots=True)
class CBlocks:
    c11: np.ndarray
    c12: np.ndarray
    c13: np.ndarray
    c21: np.ndarray
    c22: np.ndarray
    c23: np.ndarray
    c11p: np.ndarray
    c12p: np.ndarray
    c13p: np.ndarray
    c21p: np.ndarray
    c22p: np.ndarray
    c23p: np.ndarray


def _c_set(cache: AngleCache, rho, a, b, qfun: QFunction) -> tuple[np.ndarray, ...]:
    """Partials of S1(xi, a) b and S2(xi, a) b with respect to theta, rho and a."""
    c11 = _columns(lambda e: qfun(cache, rho, a, [b, e]))
    c12 = _columns(lambda e: qfun(cache, e, a, [b]))
    c13 = _columns(lambda e: qfun(cache, rho, e, [b]))
    c21 = _columns(lambda e: qfun(cache, b, a, [e]))
    c22 = np.zeros_like(c21)
    c23 = _columns(lambda e: qfun(cache, b, e, []))
    return c11, c12, c13, c21, c22, c23


def c_blocks(xi, a, b) -> CBlocks:
    """
    Second-order blocks of the SE(3) kinematics.

    C11, C12 and C13 are the theta, rho and a partials of S1(xi, a) b; C21, C22 and
    C23 are the theta, rho and a partials of S2(xi, a) b. The primed blocks use Q'.
    """
    theta, rho = split(xi)
    cache = AngleCache(theta)
    return CBlocks(*_c_set(cache, rho, a, b, _qw), *_c_set(cache, rho, a, b, _qpw))


def _h_blocks(cache: AngleCache, rho, w, base, qfun: QFunction) -> np.ndarray:
    w_theta, w_rho = split(w)
    s1, s2 = _s_pair(cache, rho, w_theta, qfun)
    return blocks(base.jacobian(cache, w_theta), s1 + base.jacobian(cache, w_rho), s2)


def h_se3(xi, xi_dot) -> np.ndarray:
    """d[Jr(xi) xi_dot]/d xi."""
    theta, rho = split(xi)
    return _h_blocks(AngleCache(theta), rho, xi_dot, JR, _qw)


def hp_se3(xi, tau) -> np.ndarray:
    """d[Jr^-1(xi) tau]/d xi."""
    theta, rho = split(xi)
    return _h_blocks(AngleCache(theta), rho, tau, JR_INV, _qpw)


@dataclass(slots=True)
class SecondOrderMaps:
    l11: np.ndarray
    l12: np.ndarray


def _l_blocks(cache: AngleCache, rho, w, v, base, qfun: QFunction) -> SecondOrderMaps:
    w_theta, w_rho = split(w)
    v_theta, v_rho = split(v)
    c11 = _columns(lambda e: qfun(cache, rho, w_theta, [v_theta, e]))
    c12 = _columns(lambda e: qfun(cache, e, w_theta, [v_theta]))
    c13 = _columns(lambda e: qfun(cache, rho, e, [v_theta]))
    c21 = _columns(lambda e: qfun(cache, v_rho, w_theta, [e]))
    l11_theta = base.jacobian(cache, w_theta, [v_theta])
    l12_theta = base.jacobian_wrt_y(cache, [v_theta])
    l11 = blocks(l11_theta, c11 + base.jacobian(cache, w_rho, [v_theta]) + c21, c12)
    c23_rho = _columns(lambda e: qfun(cache, v_rho, e, []))
    l12 = blocks(l12_theta, c13 + c23_rho, l12_theta)
    return SecondOrderMaps(l11, l12)


def l_maps_se3(xi, w, v, primed: bool = False) -> SecondOrderMaps:
    """
    Second derivatives of the SE(3) right Jacobian.

    Args:
        xi: Tangent point (theta, rho).
        w: Vector the Jacobian acts on, the first argument of H1 (or H1').
        v: Vector H1(xi, w) acts on.
        primed: Use Jr^-1 (L'11, L'12) instead of Jr (L11, L12).

    Returns:
        l11 = d[H(xi, w) v]/d xi and l12 = d[H(xi, w) v]/d w.
    """
    theta, rho = split(xi)
    cache = AngleCache(theta)
    if primed:
        return _l_blocks(cache, rho, w, v, JR_INV, _qpw)
    return _l_blocks(cache, rho, w, v, JR, _qw)


__all__ = [
    "Pose3",
    "split",
    "blocks",
    "se3_exp",
    "se3_log",
    "se3_adjoint",
    "se3_curly",
    "q_se3",
    "qp_se3",
    "jr_se3",
    "jr_inv_se3",
    "s_blocks",
    "SBlocks",
    "c_blocks",
    "CBlocks",
    "h_se3",
    "hp_se3",
    "l_maps_se3",
    "SecondOrderMaps",
]
