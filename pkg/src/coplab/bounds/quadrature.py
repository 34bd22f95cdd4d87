"""Quadrature of the weak-coupling functional A(alpha, kappa).

A(alpha, kappa) = kappa / Gamma(1 - alpha) * int_0^inf e^-t t^-(1+alpha)
E_z[log cosh(z sqrt(t / kappa))] dt - kappa (1 - alpha) / alpha.

Writing g(s) = E_z[log cosh(z sqrt(s))] and splitting off its linear part
s/2 gives A = 1/2 + kappa / Gamma(1 - alpha) * R - kappa (1 - alpha) / alpha
with R = int e^-t t^-(1+alpha) [g(t / kappa) - t / (2 kappa)] dt. Below t_split
the bracket is replaced by its series -s^2/4 + s^3/3 and integrated in closed
form through the regularized incomplete gamma function; above it adaptive
quadrature is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.laguerre import laggauss
from numpy.typing import NDArray
from scipy import integrate, special

from ..model.exceptions import DomainError
from ..model.special import LOG2, log_cosh

# Above this standard deviation E[log cosh(sigma z)] is taken through |z|
GAUSS_HERMITE_SIGMA_MAX = 2.0
LAGUERRE_ORDER = 96


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization of the z-expectation and of the t-integral."""

    hermite_order: int = 96
    t_split: float = 1e-4
    rel_tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.hermite_order < 32:
            raise DomainError(f"hermite_order must be >= 32, got {self.hermite_order}")
        if not self.t_split > 0:
            raise DomainError(f"t_split must be positive, got {self.t_split}")
        if not 0 < self.rel_tol <= 1e-8:
            raise DomainError(f"rel_tol must lie in (0, 1e-8], got {self.rel_tol}")

    def refined(self) -> "QuadratureSpec":
        """Twice the Hermite nodes and half the tolerance."""
        return QuadratureSpec(self.hermite_order * 2, self.t_split, self.rel_tol / 2)


DEFAULT_QUADRATURE = QuadratureSpec()


@lru_cache(maxsize=16)
def hermite_rule(order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = hermgauss(order)
    return nodes * math.sqrt(2.0), weights / math.sqrt(math.pi)


@lru_cache(maxsize=4)
def laguerre_rule(order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    return laggauss(order)


def log_cosh_excess(s: float, hermite_order: int = 96) -> float:
    """E_z[log cosh(z sqrt(s))] - s/2 for s >= 0 (nonpositive)."""
    if s <= 0:
        return 0.0
    sigma = math.sqrt(s)
    if sigma <= GAUSS_HERMITE_SIGMA_MAX:
        nodes, weights = hermite_rule(hermite_order)
        x = sigma * nodes
        return float(np.dot(weights, log_cosh(x) - 0.5 * x * x))
    # log cosh x = |x| - log 2 + log1p(e^-2|x|); the last term by Laguerre in y = 2 sigma |z|
    y, w = laguerre_rule(LAGUERRE_ORDER)
    density = np.exp(-0.5 * (y / (2.0 * sigma)) ** 2) / math.sqrt(2.0 * math.pi)
    remainder = float(np.dot(w, np.exp(y) * np.log1p(np.exp(-y)) * density)) / sigma
    return sigma * math.sqrt(2.0 / math.pi) - LOG2 + remainder - 0.5 * s


def _check_domain(alpha: float, kappa: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")


def quasiexpl_value(
    alpha: float, kappa: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """A(alpha, kappa) by series near t = 0 and adaptive quadrature beyond."""
    _check_domain(alpha, kappa)
    # keep s = t / kappa small on the series part
    split = min(quad.t_split, 1e-2 * kappa)
    # int_0^T e^-t t^-(1+a) (-t^2/(4k^2) + t^3/(3k^3)) dt
    near = -special.gamma(2.0 - alpha) * special.gammainc(2.0 - alpha, split) / (
        4.0 * kappa**2
    ) + special.gamma(3.0 - alpha) * special.gammainc(3.0 - alpha, split) / (3.0 * kappa**3)

    def integrand(t: float) -> float:
        return math.exp(-t) * t ** (-(1.0 + alpha)) * log_cosh_excess(t / kappa, quad.hermite_order)

    knee = max(4.0 * kappa, 2.0 * split)
    options = {"epsabs": 1e-15, "epsrel": quad.rel_tol, "limit": 400}
    middle, _ = integrate.quad(integrand, split, knee, **options)
    far, _ = integrate.quad(integrand, knee, np.inf, **options)
    remainder = float(near) + middle + far
    return 0.5 + kappa / special.gamma(1.0 - alpha) * remainder - kappa * (1.0 - alpha) / alpha


def quasiexpl_closed_lower(alpha: float, kappa: float) -> float:
    """1/2 - (1 - alpha)/(4 kappa) - kappa (1 - alpha)/alpha.

    Follows from log cosh x >= x^2/2 - x^4/12, hence a minorant of
    :func:`quasiexpl_value`.
    """
    _check_domain(alpha, kappa)
    return 0.5 - (1.0 - alpha) / (4.0 * kappa) - kappa * (1.0 - alpha) / alpha
