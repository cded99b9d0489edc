"""Vector-space Gaussian-process machinery for white noise on the (N-1)-th derivative.

All matrices here are the N x N "base" matrices acting on the derivative levels;
the full matrices are their Kronecker products with the identity (transition) or
with the noise density (covariance) of the 3- or 6-dimensional state.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import factorial

from errors import DomainError
from logger_config import logger

MIN_ORDER, MAX_ORDER = 2, 6
ILL_CONDITIONED_DT = 1e-3


def _check_order(order: int) -> None:
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise DomainError(f"GP order must be within [{MIN_ORDER}, {MAX_ORDER}], got {order}")


def _transition(order: int, dt) -> np.ndarray:
    dt = np.asarray(dt, dtype=float)
    power = np.subtract.outer(np.arange(order), np.arange(order)).T
    upper = power >= 0
    exponent = np.where(upper, power, 0)
    values = dt[..., None, None] ** exponent / factorial(exponent)
    return np.where(upper, values, 0.0)


def _process_cov(order: int, dt) -> np.ndarray:
    dt = np.asarray(dt, dtype=float)
    d = order - 1
    n = np.arange(order)
    exponent = 2 * d + 1 - n[:, None] - n[None, :]
    denominator = exponent * factorial(d - n)[:, None] * factorial(d - n)[None, :]
    return dt[..., None, None] ** exponent / denominator


def transition(order: int, dt: float) -> np.ndarray:
    """F(dt) = exp(A dt) of the N-level integrator chain: entry (n, m) = dt^(m-n) / (m-n)!."""
    _check_order(order)
    if np.any(np.asarray(dt) < 0):
        raise DomainError(f"transition interval must be non-negative, got {dt}")
    return _transition(order, dt)


def process_cov(order: int, dt: float) -> np.ndarray:
    """Q(dt) with q_nm = dt^(2D+1-n-m) / ((2D+1-n-m) (D-n)! (D-m)!), D = N - 1."""
    _check_order(order)
    if np.any(np.asarray(dt) <= 0):
        raise DomainError(f"process covariance interval must be positive, got {dt}")
    return _process_cov(order, dt)


def kron_identity(base: np.ndarray, dim: int) -> np.ndarray:
    """Batched base (..., N, N) -> base kron I_dim of shape (..., N*dim, N*dim)."""
    base = np.asarray(base, dtype=float)
    n = base.shape[-1]
    eye = np.eye(dim)
    out = base[..., :, None, :, None] * eye[:, None, :]
    return out.reshape(base.shape[:-2] + (n * dim, n * dim))


@dataclass(slots=True)
class MotionKernel:
    """Cached transition/covariance for one knot spacing."""

    dt: float
    order: int = 3
    transition: np.ndarray = field(init=False)
    process_cov: np.ndarray = field(init=False)
    _cho: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.transition = transition(self.order, self.dt)
        self.process_cov = process_cov(self.order, self.dt)
        if self.dt < ILL_CONDITIONED_DT:
            logger.warning(
                f"Knot spacing {self.dt:g}s is below {ILL_CONDITIONED_DT:g}s; "
                "the process covariance is badly conditioned"
            )
        self._cho = cho_factor(self.process_cov, lower=True)

    def interpolation(self, s) -> tuple[np.ndarray, np.ndarray]:
        """
        Lambda(s) and Psi(s) for offsets 0 <= s <= dt from the left knot.

        Args:
            s: Scalar or array of offsets.

        Returns:
            (Lambda, Psi), each of shape s.shape + (N, N).
        """
        s = np.asarray(s, dtype=float)
        if np.any(s < 0) or np.any(s > self.dt):
            raise DomainError(f"interpolation offset outside [0, {self.dt}]")
        n = self.order
        flat = s.reshape(-1)
        # Psi^T = Q(dt)^-1 F(dt - s) Q(s)
        rhs = _transition(n, self.dt - flat) @ _process_cov(n, flat)
        psi_t = cho_solve(self._cho, np.moveaxis(rhs, 0, 1).reshape(n, -1))
        psi = np.swapaxes(np.moveaxis(psi_t.reshape(n, -1, n), 1, 0), -1, -2)
        lam = _transition(n, flat) - psi @ self.transition

        left, right = flat == 0.0, flat == self.dt
        lam[left], psi[left] = np.eye(n), 0.0
        lam[right], psi[right] = 0.0, np.eye(n)
        return lam.reshape(s.shape + (n, n)), psi.reshape(s.shape + (n, n))


def interp_matrices(order: int, dt: float, s) -> tuple[np.ndarray, np.ndarray]:
    _check_order(order)
    return MotionKernel(dt, order).interpolation(s)


__all__ = ["transition", "process_cov", "interp_matrices", "kron_identity", "MotionKernel"]
