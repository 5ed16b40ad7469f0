"""1D potentials with closed-form derivatives of arbitrary order.

The phase-space current series needs spatial derivatives of V up to order
~25 and beyond, where finite differences are useless, so every potential
family carries an exact derivative formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "Potential",
    "MorsePotential",
    "HarmonicPotential",
    "PolynomialPotential",
]


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("position must be finite")


class Potential:
    """Base interface: V(x) and exact k-th derivatives, vectorized in x."""

    def __call__(self, x):
        raise NotImplementedError

    def deriv(self, x, k: int):
        """Exact ∂^k V/∂x^k.  k must be a positive integer (use __call__ for k=0)."""
        raise NotImplementedError

    def _check_order(self, k: int) -> None:
        if not isinstance(k, (int, np.integer)) or k < 1:
            raise DomainError(f"derivative order must be an integer >= 1, got {k!r}")


@dataclass(frozen=True)
class MorsePotential(Potential):
    """V(x) = D (1 - exp(-a (x - x0)))^2.

    Derivatives are a two-exponential closed form:
        d^k V/dx^k = -2 D (-a)^k e^{-a(x-x0)} + D (-2a)^k e^{-2a(x-x0)}.
    """

    D: float = 3.0
    a: float = 1.0 / math.sqrt(6.0)
    x0: float = 0.0

    def __post_init__(self):
        if not (self.D > 0 and self.a > 0):
            raise DomainError("Morse potential requires D > 0 and a > 0")

    def __call__(self, x):
        _check_finite(x)
        u = np.exp(-self.a * (np.asarray(x, dtype=float) - self.x0))
        return self.D * (1.0 - u) ** 2

    def deriv(self, x, k: int):
        self._check_order(k)
        _check_finite(x)
        u = np.exp(-self.a * (np.asarray(x, dtype=float) - self.x0))
        return -2.0 * self.D * (-self.a) ** k * u + self.D * (-2.0 * self.a) ** k * u**2


@dataclass(frozen=True)
class HarmonicPotential(Potential):
    """V(x) = (1/2) M omega^2 x^2; all derivatives of order >= 3 vanish."""

    M: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not (self.M > 0 and self.omega > 0):
            raise DomainError("harmonic potential requires M > 0 and omega > 0")

    def __call__(self, x):
        _check_finite(x)
        return 0.5 * self.M * self.omega**2 * np.asarray(x, dtype=float) ** 2

    def deriv(self, x, k: int):
        self._check_order(k)
        _check_finite(x)
        x = np.asarray(x, dtype=float)
        if k == 1:
            return self.M * self.omega**2 * x
        if k == 2:
            return np.full_like(x, self.M * self.omega**2)
        return np.zeros_like(x)


@dataclass(frozen=True)
class PolynomialPotential(Potential):
    """V(x) = sum_j c_j (x - x0)^j; the derivative series terminates at the degree."""

    coefficients: tuple = (0.0,)
    x0: float = 0.0
    _poly: np.polynomial.Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "_poly", np.polynomial.Polynomial(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        _check_finite(x)
        return self._poly(np.asarray(x, dtype=float) - self.x0)

    def deriv(self, x, k: int):
        self._check_order(k)
        _check_finite(x)
        x = np.asarray(x, dtype=float)
        if k > self.degree:
            return np.zeros_like(x)
        return self._poly.deriv(k)(x - self.x0)
