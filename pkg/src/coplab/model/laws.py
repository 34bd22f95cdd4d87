"""Return laws K(.) of the underlying renewal process.

Every law is stored as precomputed float64 tables of K(n) and of the tail
P(tau_1 > n) for n = 0..n_max. Beyond the horizon all built-in laws are pure
power laws w * n^-(1+alpha) (or, for the simple random walk, the exact ballot
tail), so the mass left beyond n_max is known analytically.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, special

from .exceptions import DomainError, HorizonError, LawFormatError

LOGGER = logging.getLogger(__name__)

DEFAULT_N_MAX = 2**20
NORMALIZATION_TOLERANCE = 1e-8


class LawKind(str, Enum):
    """Families of return laws."""

    SRW = "srw"
    ZIPF = "zipf"
    HEAVY_HEAD = "heavyhead"
    CUSTOM_TABLE = "custom"


@dataclass(frozen=True, eq=False)
class ReturnLaw:
    """Discrete inter-arrival law K(n), n >= 1, with tail ~ c_k * n^-(1+alpha).

    Instances are immutable and hashed by identity, so they can key caches and
    be shared between worker threads.
    """

    kind: LawKind
    alpha: float
    c_k: float
    head: tuple[tuple[int, float], ...]
    n_max: int
    norm: float
    head_size: int = 0
    mass_table: NDArray[np.float64] = field(repr=False, default=None)  # type: ignore[assignment]
    tail_table: NDArray[np.float64] = field(repr=False, default=None)  # type: ignore[assignment]

    # Construction -----------------------------------------------------------

    @classmethod
    def srw(cls, n_max: int = DEFAULT_N_MAX) -> "ReturnLaw":
        """First-return law of the simple random walk in half-time units.

        K(n) = binom(2n, n) / ((2n - 1) 4^n) and P(tau_1 > n) = binom(2n, n) / 4^n.
        """
        _check_horizon(n_max)
        k = np.arange(1, n_max + 1, dtype=np.float64)
        tail = np.empty(n_max + 1)
        tail[0] = 1.0
        tail[1:] = np.cumprod((2.0 * k - 1.0) / (2.0 * k))
        mass = np.zeros(n_max + 1)
        mass[1:] = tail[:-1] / (2.0 * k)
        return cls(
            kind=LawKind.SRW,
            alpha=0.5,
            c_k=1.0 / (2.0 * math.sqrt(math.pi)),
            head=(),
            n_max=n_max,
            norm=1.0,
            mass_table=_frozen(mass),
            tail_table=_frozen(tail),
        )

    @classmethod
    def zipf(
        cls,
        alpha: float,
        n_max: int = DEFAULT_N_MAX,
        head: Iterable[tuple[int, float]] = (),
    ) -> "ReturnLaw":
        """Power law K(n) = n^-(1+alpha) / norm, optionally with overridden small-n masses."""
        _check_alpha(alpha)
        _check_horizon(n_max)
        overrides = _parse_head(head)
        n0 = max(overrides, default=0)
        if n0 >= n_max:
            raise DomainError(f"head index {n0} must be below the horizon {n_max}")
        head_sum = math.fsum(overrides.values())
        if head_sum >= 1.0:
            raise DomainError(f"head masses sum to {head_sum}, leaving no tail mass")
        exponent = 1.0 + alpha
        free_weight = float(special.zeta(exponent, 1)) - math.fsum(
            n ** -exponent for n in overrides
        )
        weight = (1.0 - head_sum) / free_weight
        mass = _power_mass(alpha, weight, n_max)
        for n, p in overrides.items():
            mass[n] = p
        return cls(
            kind=LawKind.ZIPF,
            alpha=alpha,
            c_k=weight,
            head=tuple(sorted(overrides.items())),
            n_max=n_max,
            norm=1.0 / weight,
            head_size=n0,
            mass_table=_frozen(mass),
            tail_table=_frozen(_tail_from_mass(mass, alpha, weight, n_max)),
        )

    @classmethod
    def heavy_head(
        cls,
        alpha: float,
        head_size: int,
        head_fraction: float | None = None,
        n_max: int = DEFAULT_N_MAX,
    ) -> "ReturnLaw":
        """Masses proportional to 1/(n log^2(n+1)) up to ``head_size``, Zipf tail beyond.

        With ``head_fraction=None`` the head coincides with the normalized
        alpha = 0 law c/(n log^2(n+1)) on 1..head_size and the remaining mass is
        spread over the power-law tail. Otherwise the head carries exactly
        ``head_fraction`` of the total mass.
        """
        _check_alpha(alpha)
        _check_horizon(n_max)
        if not 1 <= head_size < n_max:
            raise DomainError(f"head size must lie in [1, {n_max}), got {head_size}")
        n = np.arange(1, head_size + 1, dtype=np.float64)
        shape = 1.0 / (n * np.log1p(n) ** 2)
        if head_fraction is None:
            head_masses = shape / _log_squared_normalizer(n_max)
        else:
            if not 0.0 < head_fraction < 1.0:
                raise DomainError(f"head fraction must lie in (0, 1), got {head_fraction}")
            head_masses = head_fraction * shape / shape.sum()
        head_sum = math.fsum(head_masses)
        exponent = 1.0 + alpha
        weight = (1.0 - head_sum) / float(special.zeta(exponent, head_size + 1))
        mass = _power_mass(alpha, weight, n_max)
        mass[1 : head_size + 1] = head_masses
        LOGGER.debug(
            "Heavy-head law: N0=%d head mass=%.6f tail weight=%.6g",
            head_size,
            head_sum,
            weight,
        )
        return cls(
            kind=LawKind.HEAVY_HEAD,
            alpha=alpha,
            c_k=weight,
            head=tuple((i + 1, float(p)) for i, p in enumerate(head_masses)),
            n_max=n_max,
            norm=1.0 / weight,
            head_size=head_size,
            mass_table=_frozen(mass),
            tail_table=_frozen(_tail_from_mass(mass, alpha, weight, n_max)),
        )

    @classmethod
    def custom_table(
        cls,
        head: Sequence[tuple[int, float]],
        alpha: float,
        c_k: float,
        n_max: int = DEFAULT_N_MAX,
        tolerance: float = NORMALIZATION_TOLERANCE,
    ) -> "ReturnLaw":
        """Explicit masses for n = 1..n0 followed by the tail c_k * n^-(1+alpha).

        Raises:
            LawFormatError: If the head is not 1..n0 with positive masses or the
                total (head + analytic tail) is farther than ``tolerance`` from 1.
        """
        _check_alpha(alpha)
        _check_horizon(n_max)
        if not c_k > 0:
            raise LawFormatError(f"tail constant must be positive, got {c_k}")
        overrides = _parse_head(head)
        n0 = len(overrides)
        if sorted(overrides) != list(range(1, n0 + 1)):
            raise LawFormatError("head indices must be exactly 1..n0 without gaps")
        if n0 >= n_max:
            raise LawFormatError(f"head length {n0} must be below the horizon {n_max}")
        exponent = 1.0 + alpha
        total = math.fsum(overrides.values()) + c_k * float(special.zeta(exponent, n0 + 1))
        if abs(total - 1.0) > tolerance:
            raise LawFormatError(
                f"head plus analytic tail sums to {total:.12g}, not 1 within {tolerance:g}"
            )
        weight = c_k / total
        mass = _power_mass(alpha, weight, n_max)
        for n, p in overrides.items():
            mass[n] = p / total
        return cls(
            kind=LawKind.CUSTOM_TABLE,
            alpha=alpha,
            c_k=weight,
            head=tuple(sorted(overrides.items())),
            n_max=n_max,
            norm=total,
            head_size=n0,
            mass_table=_frozen(mass),
            tail_table=_frozen(_tail_from_mass(mass, alpha, weight, n_max)),
        )

    # Queries ----------------------------------------------------------------

    def return_mass(self, n: int) -> float:
        """Return K(n) for 1 <= n <= n_max."""
        if n < 1:
            raise DomainError(f"K(n) is defined for n >= 1, got {n}")
        if n > self.n_max:
            raise HorizonError(f"n={n} exceeds the precomputed horizon {self.n_max}")
        return float(self.mass_table[n])

    def return_tail(self, n: int) -> float:
        """Return P(tau_1 > n) for 0 <= n <= n_max."""
        if n < 0:
            raise DomainError(f"tail index must be nonnegative, got {n}")
        if n > self.n_max:
            raise HorizonError(f"n={n} exceeds the precomputed horizon {self.n_max}")
        return float(self.tail_table[n])

    @property
    def tail_bound(self) -> float:
        """Mass beyond the horizon, P(tau_1 > n_max)."""
        return float(self.tail_table[self.n_max])

    @cached_property
    def log_mass(self) -> NDArray[np.float64]:
        """log K(n) with log K(0) = -inf."""
        with np.errstate(divide="ignore"):
            return _frozen(np.log(self.mass_table))

    @cached_property
    def log_tail(self) -> NDArray[np.float64]:
        with np.errstate(divide="ignore"):
            return _frozen(np.log(self.tail_table))

    @cached_property
    def cdf_table(self) -> NDArray[np.float64]:
        """P(tau_1 <= n) accumulated from the masses, for inverse-CDF sampling."""
        return _frozen(np.cumsum(self.mass_table))

    def require(self, n: int) -> None:
        """Raise HorizonError unless indices up to ``n`` are precomputed."""
        if n > self.n_max:
            raise HorizonError(f"N={n} exceeds the precomputed horizon {self.n_max}")

    def mean_return_time(self) -> float:
        """E[tau_1]; infinite when alpha <= 1."""
        if self.alpha <= 1.0:
            return math.inf
        n = np.arange(self.n_max + 1, dtype=np.float64)
        beyond = self.c_k * float(special.zeta(self.alpha, self.n_max + 1))
        return float(np.dot(n, self.mass_table)) + beyond

    def tail_ratio(self, n: int) -> float:
        """n^(1+alpha) K(n) / c_k, which tends to 1."""
        return n ** (1.0 + self.alpha) * self.return_mass(n) / self.c_k

    def tail_sup(self, m: int) -> float:
        """An upper bound on sup_{j >= m} j^(1+alpha) K(j)."""
        m = max(m, 1)
        if self.kind is LawKind.SRW:
            # j^(3/2) K(j) decreases toward c_k
            j = min(m, self.n_max)
            return j**1.5 * float(self.mass_table[j])
        if m > self.head_size:
            return self.c_k
        j = np.arange(m, self.head_size + 1, dtype=np.float64)
        head = j ** (1.0 + self.alpha) * self.mass_table[m : self.head_size + 1]
        return max(float(head.max()), self.c_k)

    def sample_increments(
        self, rng: np.random.Generator, size: int
    ) -> NDArray[np.int64]:
        """Draw IID increments by inverse CDF, with a Pareto tail beyond n_max.

        The continuous tail P(tau > x) = tail_bound * (x / n_max)^-alpha matches
        the tabulated tail at the horizon.
        """
        u = rng.random(size)
        cdf = self.cdf_table
        draws = np.searchsorted(cdf, u, side="right").astype(np.int64)
        beyond = draws > self.n_max
        if np.any(beyond):
            residual = np.maximum(1.0 - u[beyond], np.finfo(np.float64).tiny)
            with np.errstate(over="ignore"):
                scale = (self.tail_bound / residual) ** (1.0 / self.alpha)
            far = np.ceil(np.minimum(self.n_max * np.maximum(scale, 1.0), 2.0**62)).astype(
                np.int64
            )
            draws[beyond] = np.maximum(far, self.n_max + 1)
        return draws

    def describe(self) -> dict[str, Any]:
        """Summary used in serialized records."""
        return {
            "kind": self.kind.value,
            "alpha": self.alpha,
            "c_k": self.c_k,
            "norm": self.norm,
            "n_max": self.n_max,
            "head_size": self.head_size,
        }


# Module-level helpers used by the operations layer --------------------------


def return_mass(law: ReturnLaw, n: int) -> float:
    """Return K(n)."""
    return law.return_mass(n)


def return_tail(law: ReturnLaw, n: int) -> float:
    """Return P(tau_1 > n) = 1 - sum_{m <= n} K(m)."""
    return law.return_tail(n)


def law_from_name(
    name: str,
    alpha: float | None = None,
    n_max: int = DEFAULT_N_MAX,
    head_size: int | None = None,
) -> ReturnLaw:
    """Build a law from the CLI spelling ``srw``, ``zipf``, ``heavyhead`` or ``custom:FILE``."""
    text = name.strip()
    lowered = text.lower()
    if lowered == LawKind.SRW.value:
        return ReturnLaw.srw(n_max)
    if lowered.startswith("custom:"):
        from .custom_table import load_custom_table

        return load_custom_table(text.split(":", 1)[1], n_max=n_max)
    if alpha is None:
        raise DomainError(f"law {name!r} requires --alpha")
    if lowered == LawKind.ZIPF.value:
        return ReturnLaw.zipf(alpha, n_max)
    if lowered == LawKind.HEAVY_HEAD.value:
        return ReturnLaw.heavy_head(alpha, head_size or 2**8, n_max=n_max)
    raise DomainError(f"unknown return law {name!r}")


def _check_alpha(alpha: float) -> None:
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"tail exponent alpha must be positive, got {alpha}")


def _check_horizon(n_max: int) -> None:
    if n_max < 2:
        raise DomainError(f"horizon must be at least 2, got {n_max}")


def _parse_head(head: Iterable[tuple[int, float]]) -> dict[int, float]:
    parsed: dict[int, float] = {}
    for n, p in head:
        n = int(n)
        if n < 1:
            raise DomainError(f"head index must be >= 1, got {n}")
        if not p > 0:
            raise DomainError(f"head mass at n={n} must be positive, got {p}")
        if n in parsed:
            raise DomainError(f"duplicate head index {n}")
        parsed[n] = float(p)
    return parsed


def _power_mass(alpha: float, weight: float, n_max: int) -> NDArray[np.float64]:
    mass = np.zeros(n_max + 1)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    mass[1:] = weight * n ** -(1.0 + alpha)
    return mass


def _tail_from_mass(
    mass: NDArray[np.float64], alpha: float, weight: float, n_max: int
) -> NDArray[np.float64]:
    """P(tau_1 > n) by reverse accumulation from the analytic mass beyond n_max."""
    beyond = weight * float(special.zeta(1.0 + alpha, n_max + 1))
    tail = np.empty(n_max + 1)
    tail[n_max] = beyond
    tail[:n_max] = beyond + np.cumsum(mass[:0:-1])[::-1]
    tail[0] = 1.0
    return tail


def _log_squared_normalizer(n_max: int) -> float:
    """sum_{n >= 1} 1/(n log^2(n+1)), partial sum plus a midpoint integral tail.

    With u = log(1 + x) the tail integral is 1/u0 plus the integral of
    1/(u^2 (e^u - 1)), which decays exponentially.
    """
    n = np.arange(1, n_max + 1, dtype=np.float64)
    partial = float(np.sum(1.0 / (n * np.log1p(n) ** 2)))
    u0 = math.log1p(n_max + 0.5)
    correction, _ = integrate.quad(
        lambda u: math.exp(-u) / (u * u * -math.expm1(-u)), u0, np.inf
    )
    return partial + 1.0 / u0 + correction


def _frozen(array: NDArray[np.float64]) -> NDArray[np.float64]:
    array.setflags(write=False)
    return array
