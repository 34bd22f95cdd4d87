"""Heavy-tailed renewal processes: masses, paths and occupation functionals."""

from .laplace import delta_laplace, delta_laplace_curve, renewal_count_scaling
from .mass import convolution_residual, log_renewal_table, renewal_mass, renewal_table
from .paths import RenewalPath, renewal_count, sample_conditioned, sample_path

__all__ = [
    "RenewalPath",
    "convolution_residual",
    "delta_laplace",
    "delta_laplace_curve",
    "log_renewal_table",
    "renewal_count",
    "renewal_count_scaling",
    "renewal_mass",
    "renewal_table",
    "sample_conditioned",
    "sample_path",
]
