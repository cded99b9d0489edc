"""Directional derivatives of the axis-angle maps.

Exp(u), Exp(-u), Jr(u), Jl(u) and Jr^-1(u) all act on a vector as

    M(u) y = y + A(s) (u x y) + B(s) (u x (u x y)),    s = |u|^2

so any directional derivative D^m_u[M(u) y][x1, ..., xm] expands by the product
rule into derivatives of the scalar coefficients (chain rule through s) times
derivatives of the two cross-product polynomials. Orders up to three are
supported, which covers every H, L, S and C block of the SO(3)/SE(3) kinematics.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np

from modules.lie.radial import G1, G2, G3, SINC, RadialFunction

_BASIS = np.eye(3)


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, b)


class AngleCache:
    """Memo of radial function derivatives at one batch of rotation vectors."""

    __slots__ = ("u", "r", "_values")

    def __init__(self, u) -> None:
        self.u = np.asarray(u, dtype=float)
        self.r = np.linalg.norm(self.u, axis=-1)
        self._values: dict[tuple[str, int], np.ndarray] = {}

    def ds(self, fn: RadialFunction, n: int) -> np.ndarray:
        key = (fn.name, n)
        if key not in self._values:
            self._values[key] = fn.ds(n, self.r)
        return self._values[key]

    @classmethod
    def of(cls, u: Union["AngleCache", np.ndarray]) -> "AngleCache":
        return u if isinstance(u, AngleCache) else cls(u)


Coefficient = Union[RadialFunction, float]


@dataclass(frozen=True)
class AxisAngleMap:
    """y -> y + a (u x y) + b (u x (u x y)) with a, b even in |u|."""

    name: str
    a: Coefficient
    b: Coefficient
    a_sign: float = 1.0

    def _coefficient(self, cache: AngleCache, fn: Coefficient, sign: float, dirs: Sequence[np.ndarray]):
        m = len(dirs)
        if isinstance(fn, float):
            return sign * fn if m == 0 else None
        u = cache.u
        if m == 0:
            return sign * cache.ds(fn, 0)
        ud = [dot(u, x) for x in dirs]
        if m == 1:
            value = 2.0 * cache.ds(fn, 1) * ud[0]
        elif m == 2:
            value = 4.0 * cache.ds(fn, 2) * ud[0] * ud[1] + 2.0 * cache.ds(fn, 1) * dot(dirs[0], dirs[1])
        else:
            x, z, q = dirs
            value = 8.0 * cache.ds(fn, 3) * ud[0] * ud[1] * ud[2] + 4.0 * cache.ds(fn, 2) * (
                dot(x, z) * ud[2] + dot(x, q) * ud[1] + dot(z, q) * ud[0]
            )
        return sign * value

    @staticmethod
    def _single_cross(u: np.ndarray, y: np.ndarray, dirs: Sequence[np.ndarray]) -> Optional[np.ndarray]:
        if len(dirs) == 0:
            return np.cross(u, y)
        if len(dirs) == 1:
            return np.cross(dirs[0], y)
        return None

    @staticmethod
    def _double_cross(u: np.ndarray, y: np.ndarray, dirs: Sequence[np.ndarray]) -> Optional[np.ndarray]:
        if len(dirs) == 0:
            return np.cross(u, np.cross(u, y))
        if len(dirs) == 1:
            x = dirs[0]
            return np.cross(x, np.cross(u, y)) + np.cross(u, np.cross(x, y))
        if len(dirs) == 2:
            x, z = dirs
            return np.cross(x, np.cross(z, y)) + np.cross(z, np.cross(x, y))
        return None

    def derivative(self, u, y: np.ndarray, dirs: Sequence[np.ndarray] = ()) -> np.ndarray:
        """D^m_u[M(u) y] along dirs (m = len(dirs) <= 3); y is held fixed."""
        cache = AngleCache.of(u)
        y = np.asarray(y, dtype=float)
        dirs = [np.asarray(d, dtype=float) for d in dirs]
        m = len(dirs)
        shape = np.broadcast_shapes(cache.u.shape, y.shape, *(d.shape for d in dirs))
        out = np.zeros(shape) + (y if m == 0 else 0.0)
        for size in range(max(0, m - 2), m + 1):
            for chosen in combinations(range(m), size):
                on_coeff = [dirs[i] for i in chosen]
                on_poly = [dirs[i] for i in range(m) if i not in chosen]
                da = self._coefficient(cache, self.a, self.a_sign, on_coeff)
                p1 = self._single_cross(cache.u, y, on_poly)
                if da is not None and p1 is not None:
                    out = out + np.asarray(da)[..., None] * p1
                db = self._coefficient(cache, self.b, 1.0, on_coeff)
                p2 = self._double_cross(cache.u, y, on_poly)
                if db is not None and p2 is not None:
                    out = out + np.asarray(db)[..., None] * p2
        return out

    def jacobian(self, u, y: np.ndarray, dirs: Sequence[np.ndarray] = ()) -> np.ndarray:
        """Matrix whose i-th column is D^(m+1)_u[M(u) y][dirs, e_i]."""
        cache = AngleCache.of(u)
        return np.stack([self.derivative(cache, y, [*dirs, e]) for e in _BASIS], axis=-1)

    def jacobian_wrt_y(self, u, dirs: Sequence[np.ndarray] = ()) -> np.ndarray:
        """Matrix whose i-th column is D^m_u[M(u) e_i][dirs]."""
        cache = AngleCache.of(u)
        return np.stack([self.derivative(cache, e, dirs) for e in _BASIS], axis=-1)

    def matrix(self, u) -> np.ndarray:
        return self.jacobian_wrt_y(u)


EXP = AxisAngleMap("exp", SINC, G1)
EXP_NEG = AxisAngleMap("exp_neg", SINC, G1, a_sign=-1.0)
JR = AxisAngleMap("jr", G1, G2, a_sign=-1.0)
JL = AxisAngleMap("jl", G1, G2)
JR_INV = AxisAngleMap("jr_inv", 0.5, G3)

__all__ = ["AngleCache", "AxisAngleMap", "EXP", "EXP_NEG", "JR", "JL", "JR_INV", "dot"]
