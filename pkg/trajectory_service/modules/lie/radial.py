"""Radial coefficient functions of the SO(3) closed forms.

Exp, Jr and Jr^-1 are built from even analytic functions of the rotation
angle r = |theta|:

    g1(r)   = (1 - cos r) / r^2
    g2(r)   = (r - sin r) / r^3
    g3(r)   = 1 / r^2 - (1 + cos r) / (2 r sin r)
    sinc(r) = sin r / r

Each function is evaluated from its power series in s = r^2 below SERIES_BAND
and from the trigonometric closed form above it. Derivatives are available with
respect to r (`dr`) and with respect to s (`ds`); the s-derivatives are what the
directional derivative engine consumes, because d s / d theta = 2 theta.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import bernoulli, comb, factorial, poch

from errors import DomainError

# Series below this angle, closed form above. The series is exact at r = 0, so
# closed-form kinematics need no small-angle switch to the approximated model.
SERIES_BAND = 0.5
SERIES_TERMS = 12
MAX_ORDER = 3
INVERSE_LIMIT = 2.0 * np.pi - 1e-6

ClosedForm = Callable[[int, np.ndarray], np.ndarray]


def _power_derivative(m: int, j: int, r: np.ndarray) -> np.ndarray:
    """j-th derivative of r**(-m)."""
    return (-1.0) ** j * poch(m, j) * r ** (-m - j)


def _quotient_derivative(numerator: list[np.ndarray], m: int, n: int, r: np.ndarray) -> np.ndarray:
    """n-th derivative of N(r) * r**(-m), given N, N', ..., N^(n)."""
    total = np.zeros_like(r)
    for k in range(n + 1):
        total = total + comb(n, k) * numerator[k] * _power_derivative(m, n - k, r)
    return total


def _g1_closed(n: int, r: np.ndarray) -> np.ndarray:
    numerator = [2.0 * np.sin(0.5 * r) ** 2] + [-np.cos(r + 0.5 * k * np.pi) for k in range(1, n + 1)]
    return _quotient_derivative(numerator, 2, n, r)


def _g2_closed(n: int, r: np.ndarray) -> np.ndarray:
    numerator = [r - np.sin(r), 2.0 * np.sin(0.5 * r) ** 2]
    numerator += [-np.sin(r + 0.5 * k * np.pi) for k in range(2, n + 1)]
    return _quotient_derivative(numerator[: n + 1], 3, n, r)


def _sinc_closed(n: int, r: np.ndarray) -> np.ndarray:
    numerator = [np.sin(r + 0.5 * k * np.pi) for k in range(n + 1)]
    return _quotient_derivative(numerator, 1, n, r)


# d^k/dr^k cot(r/2) written as a polynomial in c = cot(r/2)
_COT_POLYNOMIALS = [Polynomial([0.0, 1.0])]
for _ in range(MAX_ORDER):
    _COT_POLYNOMIALS.append(_COT_POLYNOMIALS[-1].deriv() * Polynomial([-0.5, 0.0, -0.5]))


def _g3_closed(n: int, r: np.ndarray) -> np.ndarray:
    c = 1.0 / np.tan(0.5 * r)
    total = _power_derivative(2, n, r)
    for k in range(n + 1):
        total = total - 0.5 * comb(n, k) * _COT_POLYNOMIALS[k](c) * _power_derivative(1, n - k, r)
    return total


@dataclass(eq=False)
class RadialFunction:
    """An even function of the angle, known by its series in s = r^2 and its closed form."""

    name: str
    series: np.ndarray
    closed_form: ClosedForm
    limit: float = np.inf
    _in_s: Polynomial = field(init=False, repr=False)
    _in_r: Polynomial = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._in_s = Polynomial(self.series)
        even = np.zeros(2 * len(self.series) - 1)
        even[::2] = self.series
        self._in_r = Polynomial(even)

    def _check(self, r: np.ndarray, n: int) -> None:
        if not 0 <= n <= MAX_ORDER:
            raise DomainError(f"{self.name}: derivative order {n} not in [0, {MAX_ORDER}]")
        if np.any(r >= self.limit):
            raise DomainError(f"{self.name} is undefined for rotation angles >= {self.limit:.6f} rad")

    def dr(self, n: int, r) -> np.ndarray:
        """n-th derivative with respect to the angle r."""
        shape = np.shape(r)
        r = np.asarray(r, dtype=float).reshape(-1)
        self._check(r, n)
        small = r < SERIES_BAND
        out = np.empty_like(r)
        out[small] = self._in_r.deriv(n)(r[small]) if n else self._in_r(r[small])
        out[~small] = self.closed_form(n, r[~small])
        return out.reshape(shape)

    def ds(self, n: int, r) -> np.ndarray:
        """n-th derivative with respect to s = r^2, evaluated at angle r."""
        shape = np.shape(r)
        r = np.asarray(r, dtype=float).reshape(-1)
        self._check(r, n)
        small = r < SERIES_BAND
        out = np.empty_like(r)
        out[small] = self._in_s.deriv(n)(r[small] ** 2) if n else self._in_s(r[small] ** 2)
        big = r[~small]
        if n == 0:
            out[~small] = self.closed_form(0, big)
        else:
            d = [self.closed_form(k, big) for k in range(1, n + 1)]
            if n == 1:
                out[~small] = d[0] / (2.0 * big)
            elif n == 2:
                out[~small] = (d[1] - d[0] / big) / (4.0 * big**2)
            else:
                out[~small] = (d[2] - 3.0 * d[1] / big + 3.0 * d[0] / big**2) / (8.0 * big**3)
        return out.reshape(shape)


_k = np.arange(SERIES_TERMS)
_sign = (-1.0) ** _k

G1 = RadialFunction("g1", _sign / factorial(2 * _k + 2), _g1_closed)
G2 = RadialFunction("g2", _sign / factorial(2 * _k + 3), _g2_closed)
G3 = RadialFunction(
    "g3",
    _sign * bernoulli(2 * SERIES_TERMS)[2 * _k + 2] / factorial(2 * _k + 2),
    _g3_closed,
    limit=INVERSE_LIMIT,
)
SINC = RadialFunction("sinc", _sign / factorial(2 * _k + 1), _sinc_closed)

G_FUNCTIONS = {1: G1, 2: G2, 3: G3}


def g_eval(j: int, n: int, u) -> np.ndarray:
    """
    Evaluate the n-th angle derivative of g_j.

    Args:
        j: Which g function (1, 2 or 3).
        n: Derivative order, 0 to 3.
        u: Rotation angle(s), u >= 0.

    Returns:
        Array with the shape of `u`.
    """
    if j not in G_FUNCTIONS:
        raise DomainError(f"g_eval: unknown function index {j}")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("g_eval: the angle must be non-negative")
    return G_FUNCTIONS[j].dr(n, u)


__all__ = ["RadialFunction", "G1", "G2", "G3", "SINC", "g_eval", "SERIES_BAND", "INVERSE_LIMIT"]
