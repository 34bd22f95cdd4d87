"""Optimization of A(alpha, kappa) over kappa and the alpha threshold roots."""

from __future__ import annotations

import logging
import math
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import optimize

from ..metrics import QUADRATURE_BUDGET_S, get_metrics
from ..model.exceptions import DomainError
from .quadrature import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    quasiexpl_closed_lower,
    quasiexpl_value,
)

LOGGER = logging.getLogger(__name__)

KAPPA_MIN = 1e-3
KAPPA_MAX = 10.0
KAPPA_GRID_POINTS = 25
THRESHOLD_BRACKET = (0.5, 0.999)
QUADRATURE_XTOL = 1e-5
CLOSED_FORM_XTOL = 1e-12


class ThresholdKind(str, Enum):
    """Which A(alpha) enters 2(1 + alpha) A(alpha) = 1."""

    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed_form"


def kappa_grid() -> np.ndarray:
    """Log-spaced coarse grid on [1e-3, 10] used to seed the optimizer."""
    return np.geomspace(KAPPA_MIN, KAPPA_MAX, KAPPA_GRID_POINTS)


@lru_cache(maxsize=256)
def optimize_kappa(
    alpha: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> tuple[float, float]:
    """Maximize A(alpha, kappa) over log kappa in [log 1e-3, log 10].

    A coarse log grid picks the bracket, a bounded Brent search refines it,
    and the best of the refined point, the grid points and kappa = sqrt(alpha)/2
    is returned as (kappa_star, a_star).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    grid = kappa_grid()
    values = np.array([quasiexpl_value(alpha, float(k), quad) for k in grid])
    best = int(np.argmax(values))
    lo = math.log(grid[max(best - 1, 0)])
    hi = math.log(grid[min(best + 1, grid.size - 1)])
    result = optimize.minimize_scalar(
        lambda u: -quasiexpl_value(alpha, math.exp(u), quad),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-7, "maxiter": 60},
    )
    candidates = [(float(grid[best]), float(values[best]))]
    if result.success:
        candidates.append((math.exp(float(result.x)), -float(result.fun)))
    reference = math.sqrt(alpha) / 2.0
    candidates.append((reference, quasiexpl_value(alpha, reference, quad)))
    kappa_star, a_star = max(candidates, key=lambda pair: pair[1])
    LOGGER.debug("alpha=%.6f: kappa*=%.6g A*=%.9f", alpha, kappa_star, a_star)
    return kappa_star, a_star


def optimized_quasiexpl(alpha: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return optimize_kappa(alpha, quad)[1]


def closed_form_quasiexpl(alpha: float) -> float:
    """The minorant at kappa = sqrt(alpha)/2, equal to 1/2 - (1 - alpha)/sqrt(alpha)."""
    return quasiexpl_closed_lower(alpha, math.sqrt(alpha) / 2.0)


def alpha_threshold(
    kind: ThresholdKind | str = ThresholdKind.QUADRATURE,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Bisection root of 2(1 + alpha) A(alpha) = 1 on [0.5, 0.999]."""
    kind = ThresholdKind(kind)
    if kind is ThresholdKind.CLOSED_FORM:

        def residual(alpha: float) -> float:
            return 2.0 * (1.0 + alpha) * closed_form_quasiexpl(alpha) - 1.0

        xtol = CLOSED_FORM_XTOL
    else:

        def residual(alpha: float) -> float:
            return 2.0 * (1.0 + alpha) * optimized_quasiexpl(alpha, quad) - 1.0

        xtol = QUADRATURE_XTOL
    metrics = get_metrics()
    metrics.start("alpha_threshold")
    root = optimize.bisect(residual, *THRESHOLD_BRACKET, xtol=xtol)
    event = metrics.stop("alpha_threshold", kind=kind.value)
    if event is not None and event.exceeds_budget(QUADRATURE_BUDGET_S):
        LOGGER.warning(
            "Threshold root took %.1fs (budget %.0fs)", event.duration_s, QUADRATURE_BUDGET_S
        )
    LOGGER.info("Threshold alpha (%s) = %.6f", kind.value, root)
    return float(root)
