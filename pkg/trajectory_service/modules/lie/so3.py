from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from modules.lie.derivatives import EXP, JR, JR_INV, AngleCache
from modules.lie.radial import G1, G2, G3

SMALL_ANGLE = 1e-4
# Below this cosine the axis is read from the symmetric part of R
_NEAR_PI_COS = -0.999


def hat(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1], out[..., 0, 2] = -v[..., 2], v[..., 1]
    out[..., 1, 0], out[..., 1, 2] = v[..., 2], -v[..., 0]
    out[..., 2, 0], out[..., 2, 1] = -v[..., 1], v[..., 0]
    return out


def vee(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def transpose(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2)


def so3_exp(theta) -> np.ndarray:
    return EXP.matrix(theta)


def so3_log(rotation) -> np.ndarray:
    """Principal-branch logarithm, |theta| <= pi."""
    rotation = np.asarray(rotation, dtype=float)
    batch_shape = rotation.shape[:-2]
    rotation = rotation.reshape(-1, 3, 3)
    s = 0.5 * vee(rotation - transpose(rotation))
    sin_angle = np.linalg.norm(s, axis=-1)
    cos_angle = np.clip(0.5 * (np.trace(rotation, axis1=-2, axis2=-1) - 1.0), -1.0, 1.0)
    angle = np.arctan2(sin_angle, cos_angle)

    small = angle < SMALL_ANGLE
    safe_sin = np.where(small, 1.0, sin_angle)
    scale = np.where(small, 1.0 + angle**2 / 6.0 + 7.0 * angle**4 / 360.0, angle / safe_sin)
    theta = s * scale[..., None]

    near_pi = cos_angle < _NEAR_PI_COS
    if np.any(near_pi):
        theta[near_pi] = _log_near_pi(rotation[near_pi], s[near_pi], cos_angle[near_pi], angle[near_pi])
    return theta.reshape(batch_shape + (3,))


def _log_near_pi(rotation: np.ndarray, s: np.ndarray, cos_angle: np.ndarray, angle: np.ndarray) -> np.ndarray:
    # (R + R^T)/2 = cos I + (1 - cos) a a^T
    sym = 0.5 * (rotation + transpose(rotation)) - cos_angle[:, None, None] * np.eye(3)
    sym = sym / (1.0 - cos_angle)[:, None, None]
    diagonal = np.diagonal(sym, axis1=-2, axis2=-1)
    column = np.argmax(diagonal, axis=-1)
    rows = np.arange(len(column))
    axis = sym[rows, :, column] / np.sqrt(np.maximum(diagonal[rows, column], 1e-300))[:, None]
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)

    along = np.einsum("ni,ni->n", axis, s)
    dominant = axis[rows, np.argmax(np.abs(axis), axis=-1)]
    flip = np.where(np.abs(along) > 1e-12, along < 0, dominant < 0)
    axis[flip] *= -1.0
    return axis * angle[:, None]


def jr_so3(theta) -> np.ndarray:
    return JR.matrix(theta)


def jr_inv_so3(theta) -> np.ndarray:
    return JR_INV.matrix(theta)


def jl_so3(theta) -> np.ndarray:
    return JR.matrix(-np.asarray(theta, dtype=float))


@dataclass(slots=True)
class FMaps:
    f: np.ndarray
    f_u: np.ndarray
    f_uu: np.ndarray
    f_uv: np.ndarray


def f_maps(u, v, w) -> FMaps:
    """f(u) = (u^)^2 with its derivatives f_u(u,v) = d[f(u)v]/du and the second derivatives of f_u(u,v)w."""
    u, v, w = (np.asarray(x, dtype=float) for x in (u, v, w))
    u_hat, v_hat, w_hat = hat(u), hat(v), hat(w)
    return FMaps(
        f=u_hat @ u_hat,
        f_u=-u_hat @ v_hat - hat(np.cross(u, v)),
        f_uu=hat(np.cross(v, w)) - w_hat @ v_hat,
        f_uv=u_hat @ w_hat + w_hat @ u_hat,
    )


def _unit(cache: AngleCache) -> np.ndarray:
    r = cache.r[..., None]
    return np.where(r > 0.0, cache.u / np.where(r > 0.0, r, 1.0), 0.0)


def h1_so3(theta, v) -> np.ndarray:
    """H1(theta, v) = d[Jr(theta) v]/d theta."""
    cache = AngleCache(theta)
    u, v = cache.u, np.asarray(v, dtype=float)
    unit = _unit(cache)
    fm = f_maps(u, v, np.zeros(3))
    g1, g2 = cache.ds(G1, 0), cache.ds(G2, 0)
    dg1, dg2 = G1.dr(1, cache.r), G2.dr(1, cache.r)
    return (
        g1[..., None, None] * hat(v)
        + dg1[..., None, None] * outer(np.cross(v, u), unit)
        + g2[..., None, None] * fm.f_u
        + dg2[..., None, None] * outer(np.einsum("...ij,...j->...i", fm.f, v), unit)
    )


def h1p_so3(theta, v) -> np.ndarray:
    """H1'(theta, v) = d[Jr^-1(theta) v]/d theta."""
    cache = AngleCache(theta)
    u, v = cache.u, np.asarray(v, dtype=float)
    unit = _unit(cache)
    fm = f_maps(u, v, np.zeros(3))
    g3 = cache.ds(G3, 0)
    dg3 = G3.dr(1, cache.r)
    return (
        -0.5 * hat(v)
        + g3[..., None, None] * fm.f_u
        + dg3[..., None, None] * outer(np.einsum("...ij,...j->...i", fm.f, v), unit)
    )


@dataclass(slots=True)
class LMaps:
    l11: np.ndarray
    l12: np.ndarray
    l11p: np.ndarray
    l12p: np.ndarray


def l_maps_so3(theta, v, w) -> LMaps:
    """Second derivatives: L11 = d[H1(u,v)w]/du, L12 = d[H1(u,v)w]/dv and their Jr^-1 counterparts."""
    cache = AngleCache(theta)
    w = np.asarray(w, dtype=float)
    return LMaps(
        l11=JR.jacobian(cache, v, [w]),
        l12=JR.jacobian_wrt_y(cache, [w]),
        l11p=JR_INV.jacobian(cache, v, [w]),
        l12p=JR_INV.jacobian_wrt_y(cache, [w]),
    )


__all__ = [
    "hat",
    "vee",
    "so3_exp",
    "so3_log",
    "jr_so3",
    "jr_inv_so3",
    "jl_so3",
    "f_maps",
    "FMaps",
    "h1_so3",
    "h1p_so3",
    "l_maps_so3",
    "LMaps",
    "SMALL_ANGLE",
]
