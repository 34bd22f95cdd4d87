"""Problem instances: a return law, a disorder law and a coupling point."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

from .disorder import DisorderLaw
from .exceptions import DomainError
from .laws import ReturnLaw


@dataclass(frozen=True)
class CouplingPoint:
    """Coupling strength lambda >= 0 and charge asymmetry h."""

    lam: float
    h: float = 0.0

    def __post_init__(self) -> None:
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be finite and nonnegative, got {self.lam}")
        if not math.isfinite(self.h):
            raise DomainError(f"h must be finite, got {self.h}")


@dataclass(frozen=True)
class ModelSpec:
    """The full copolymer instance shared by every computation."""

    return_law: ReturnLaw
    disorder: DisorderLaw = field(default_factory=DisorderLaw)
    coupling: CouplingPoint = field(default_factory=lambda: CouplingPoint(0.0))

    @classmethod
    def build(
        cls,
        return_law: ReturnLaw,
        disorder: DisorderLaw | None = None,
        lam: float = 0.0,
        h: float = 0.0,
    ) -> "ModelSpec":
        return cls(return_law, disorder or DisorderLaw(), CouplingPoint(lam, h))

    @property
    def lam(self) -> float:
        return self.coupling.lam

    @property
    def h(self) -> float:
        return self.coupling.h

    @property
    def alpha(self) -> float:
        return self.return_law.alpha

    def with_h(self, h: float) -> "ModelSpec":
        """Same law and disorder at another asymmetry."""
        return replace(self, coupling=CouplingPoint(self.coupling.lam, h))

    def with_coupling(self, lam: float, h: float) -> "ModelSpec":
        return replace(self, coupling=CouplingPoint(lam, h))

    def describe(self) -> dict[str, Any]:
        return {
            "law": self.return_law.describe(),
            "disorder": self.disorder.kind.value,
            "lambda": self.coupling.lam,
            "h": self.coupling.h,
        }
