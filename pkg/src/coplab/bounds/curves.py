"""Critical-curve bounds at finite coupling and their weak-coupling slopes."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import special, stats

from ..model.disorder import DisorderLaw, h_m_curve
from ..model.exceptions import DomainError
from ..model.laws import ReturnLaw
from ..model.special import LOG2, log_cosh
from ..stats import MCEstimate
from .kappa import closed_form_quasiexpl, optimize_kappa
from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec, hermite_rule

LOGGER = logging.getLogger(__name__)

JENSEN_TRUNCATION = 2000


@dataclass(frozen=True)
class BoundCurves:
    """Bounds on h_c(lambda) and on its slope at one coupling strength."""

    lam: float
    h_lower_old: float
    h_upper: float
    h_lower_neutral: float | None
    slope_lower: float
    slope_upper: float = 1.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@lru_cache(maxsize=128)
def slope_lower_bound(alpha: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Best proven lower bound on liminf h_c(lambda)/lambda as lambda -> 0.

    For alpha >= 1 it is max(1/(1+alpha), 1/sqrt(1+alpha), 1/2); below 1 the
    neutral-stretch value sqrt(2 A(alpha)/(1+alpha)) with the optimized A
    competes with 1/(1+alpha).
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    classical = 1.0 / (1.0 + alpha)
    if alpha >= 1.0:
        return max(classical, 1.0 / math.sqrt(1.0 + alpha), 0.5)
    _, a_star = optimize_kappa(alpha, quad)
    return max(classical, math.sqrt(2.0 * max(a_star, 0.0) / (1.0 + alpha)))


def neutral_stretch_hc_lower(alpha: float, f_lambda0: MCEstimate) -> float:
    """sqrt(2 max(0, lower bound of F(lambda, 0)) / (1 + alpha)) for Gaussian charges."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return math.sqrt(2.0 * max(0.0, f_lambda0.lower()) / (1.0 + alpha))


def bound_curves(
    law: ReturnLaw,
    disorder: DisorderLaw,
    lam: float,
    f_lambda0: MCEstimate | None = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> BoundCurves:
    """h^(1/(1+alpha))(lambda), h^(1)(lambda), the neutral-stretch value and slopes."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    alpha = law.alpha
    neutral = None
    if f_lambda0 is not None:
        if disorder.is_gaussian:
            neutral = neutral_stretch_hc_lower(alpha, f_lambda0)
        else:
            LOGGER.debug("Neutral-stretch bound skipped for %s charges", disorder.kind.value)
    return BoundCurves(
        lam=lam,
        h_lower_old=h_m_curve(disorder, 1.0 / (1.0 + alpha), lam),
        h_upper=h_m_curve(disorder, 1.0, lam),
        h_lower_neutral=neutral,
        slope_lower=slope_lower_bound(alpha, quad),
    )


def weak_coupling_slope_report(
    alpha: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> dict[str, Any]:
    """One row of the slope table: every competing bound at this alpha."""
    row: dict[str, Any] = {
        "alpha": alpha,
        "classical": 1.0 / (1.0 + alpha),
        "neutral_large_alpha": 1.0 / math.sqrt(1.0 + alpha),
        "closed_form_A": None,
        "quadrature_A": None,
        "kappa_star": None,
        "slope_lower": slope_lower_bound(alpha, quad),
    }
    if 0.0 < alpha < 1.0:
        kappa_star, a_star = optimize_kappa(alpha, quad)
        row.update(
            closed_form_A=closed_form_quasiexpl(alpha),
            quadrature_A=a_star,
            kappa_star=kappa_star,
        )
    return row


def jensen_excursion_lower_bound(
    law: ReturnLaw,
    disorder: DisorderLaw,
    lam: float,
    h: float,
    truncation: int = JENSEN_TRUNCATION,
    hermite_order: int = 96,
) -> float:
    """Lower bound on F(lambda, h) from Jensen's inequality over the renewal.

    F >= -lambda h + (1/E[tau]) sum_n K(n) E[log cosh(lambda h n + lambda omega(0, n])],
    valid when E[tau] is finite (alpha > 1). Every summand is nonnegative, so
    truncating the sum keeps the bound.
    """
    if law.alpha <= 1.0:
        raise DomainError(f"the excursion Jensen bound needs alpha > 1, got {law.alpha}")
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    mean = law.mean_return_time()
    top = min(truncation, law.n_max)
    n = np.arange(1, top + 1)
    if disorder.is_gaussian:
        terms = _gaussian_log_cosh(lam * h * n, lam * np.sqrt(n), hermite_order)
    else:
        terms = np.array([_rademacher_log_cosh(lam, h, int(j)) for j in n])
    value = -lam * h + float(np.dot(law.mass_table[1 : top + 1], terms)) / mean
    return max(0.0, value)


def _gaussian_log_cosh(mu: np.ndarray, sigma: np.ndarray, hermite_order: int) -> np.ndarray:
    """Lower estimates of E[log cosh(mu + sigma z)].

    E|X| - log 2 is exact; the nonnegative log1p(e^-2|X|) part is added by
    Gauss-Hermite only where sigma <= 2 and dropped elsewhere.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(sigma > 0, mu / sigma, np.inf)
    abs_mean = sigma * np.sqrt(2.0 / np.pi) * np.exp(-0.5 * ratio**2) + mu * (
        1.0 - 2.0 * special.ndtr(-ratio)
    )
    nodes, weights = hermite_rule(hermite_order)
    x = mu[:, None] + sigma[:, None] * nodes[None, :]
    remainder = (np.log1p(np.exp(-2.0 * np.abs(x))) @ weights).ravel()
    remainder = np.where(sigma <= 2.0, remainder, 0.0)
    return abs_mean - LOG2 + remainder


def _rademacher_log_cosh(lam: float, h: float, n: int) -> float:
    """E[log cosh(lambda h n + lambda omega(0, n])] with omega(0, n] = 2 Bin(n, 1/2) - n."""
    b = np.arange(n + 1)
    pmf = stats.binom.pmf(b, n, 0.5)
    return float(np.dot(pmf, log_cosh(lam * h * n + lam * (2.0 * b - n))))
