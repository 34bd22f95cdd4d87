"""Fractional-moment delocalization certificates."""

from .certificate import (
    DelocCertificate,
    FracParams,
    RecipeOrigin,
    delocalization_certificate,
    parameter_recipe,
)
from .moments import (
    fractional_free_energy_bound,
    fractional_moment_estimates,
    fractional_moment_samples,
    log_moment_samples,
)
from .weights import (
    RADEMACHER_EXACT_MAX,
    WeightMode,
    b_tail_upper,
    b_weight,
    b_weights,
    clear_tail_cache,
    effective_mode,
    exact_mode_available,
)

__all__ = [
    "DelocCertificate",
    "FracParams",
    "RADEMACHER_EXACT_MAX",
    "RecipeOrigin",
    "WeightMode",
    "b_tail_upper",
    "b_weight",
    "b_weights",
    "clear_tail_cache",
    "delocalization_certificate",
    "effective_mode",
    "exact_mode_available",
    "fractional_free_energy_bound",
    "fractional_moment_estimates",
    "fractional_moment_samples",
    "log_moment_samples",
    "parameter_recipe",
]
