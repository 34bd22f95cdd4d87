"""Charge (disorder) laws and the h^(m) family of critical-curve bounds."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import DomainError
from .special import log_cosh


class DisorderKind(str, Enum):
    """Supported laws of a single charge omega_1."""

    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"


@dataclass(frozen=True)
class DisorderLaw:
    """Law of the IID charges: centered, unit variance, finite M(t)."""

    kind: DisorderKind = DisorderKind.GAUSSIAN

    @classmethod
    def parse(cls, text: str) -> "DisorderLaw":
        """Build a law from its CLI name."""
        try:
            return cls(DisorderKind(text.strip().lower()))
        except ValueError as exc:
            raise DomainError(f"unknown disorder law {text!r}") from exc

    @property
    def is_gaussian(self) -> bool:
        return self.kind is DisorderKind.GAUSSIAN

    def log_mgf(self, t: ArrayLike) -> NDArray[np.float64]:
        """Return log M(t) = log E[exp(t omega_1)]."""
        x = np.asarray(t, dtype=np.float64)
        if self.kind is DisorderKind.GAUSSIAN:
            return 0.5 * x * x
        return log_cosh(x)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> NDArray:
        """Draw IID charges from ``rng``."""
        if self.kind is DisorderKind.GAUSSIAN:
            return rng.standard_normal(size)
        return 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0


def log_mgf(disorder: DisorderLaw, t: float) -> float:
    """Return log M(t): t^2/2 for Gaussian charges, log cosh t for Rademacher."""
    return float(disorder.log_mgf(t))


def h_m_curve(disorder: DisorderLaw, m: float, lam: float) -> float:
    """Return h^(m)(lambda) = log M(-2 m lambda) / (2 m lambda).

    Raises:
        DomainError: If m <= 0 or lambda <= 0 (the lambda -> 0 slope is m).
    """
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    if not lam > 0:
        raise DomainError(f"lambda must be positive for h^(m), got {lam}")
    t = -2.0 * m * lam
    return log_mgf(disorder, t) / (2.0 * m * lam)


def annealed_exponent(disorder: DisorderLaw, lam: float, h: float, m: float = 1.0) -> float:
    """Return log M(-2 m lambda) - 2 m lambda h.

    This is the per-monomer growth rate of an all-negative excursion under the
    m-th fractional annealing; it is <= 0 exactly when h >= h^(m)(lambda).
    """
    t = -2.0 * m * lam
    return log_mgf(disorder, t) - 2.0 * m * lam * h

