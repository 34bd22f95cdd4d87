"""Deterministic critical-curve bounds, the A(alpha, kappa) quadrature and its roots."""

from .curves import (
    BoundCurves,
    bound_curves,
    jensen_excursion_lower_bound,
    neutral_stretch_hc_lower,
    slope_lower_bound,
    weak_coupling_slope_report,
)
from .kappa import (
    ThresholdKind,
    alpha_threshold,
    closed_form_quasiexpl,
    kappa_grid,
    optimize_kappa,
    optimized_quasiexpl,
)
from .quadrature import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    hermite_rule,
    laguerre_rule,
    log_cosh_excess,
    quasiexpl_closed_lower,
    quasiexpl_value,
)

__all__ = [
    "BoundCurves",
    "DEFAULT_QUADRATURE",
    "QuadratureSpec",
    "ThresholdKind",
    "alpha_threshold",
    "bound_curves",
    "closed_form_quasiexpl",
    "hermite_rule",
    "jensen_excursion_lower_bound",
    "kappa_grid",
    "laguerre_rule",
    "log_cosh_excess",
    "neutral_stretch_hc_lower",
    "optimize_kappa",
    "optimized_quasiexpl",
    "quasiexpl_closed_lower",
    "quasiexpl_value",
    "slope_lower_bound",
    "weak_coupling_slope_report",
]
