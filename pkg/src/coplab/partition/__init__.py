"""Quenched and annealed partition functions, free-energy estimates, localization."""

from .annealed import (
    annealed_constrained_logZ,
    annealed_free_energy,
    annealed_log_profile,
    decomposition_terms,
)
from .dp import (
    ConstrainedLogZProfile,
    constrained_logZ_profile,
    extend_log_profiles,
    free_logZ,
    free_logZ_from_profile,
)
from .estimate import (
    LocalizationVerdict,
    Verdict,
    free_energy_estimate,
    localization_certificate,
    log_partition_samples,
)
from .oracle import MAX_EXPLICIT_SIGNS_N, MAX_ORACLE_N, brute_force_logZ
from .sample import DisorderSample, draw_prefix_batch

__all__ = [
    "ConstrainedLogZProfile",
    "DisorderSample",
    "LocalizationVerdict",
    "MAX_EXPLICIT_SIGNS_N",
    "MAX_ORACLE_N",
    "Verdict",
    "annealed_constrained_logZ",
    "annealed_free_energy",
    "annealed_log_profile",
    "brute_force_logZ",
    "constrained_logZ_profile",
    "decomposition_terms",
    "draw_prefix_batch",
    "extend_log_profiles",
    "free_energy_estimate",
    "free_logZ",
    "free_logZ_from_profile",
    "localization_certificate",
    "log_partition_samples",
]
