"""Monte Carlo fractional moments A_i = E[(Z^c_i)^gamma]."""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from ..metrics import get_metrics
from ..model.exceptions import DomainError
from ..model.spec import ModelSpec
from ..partition.dp import extend_log_profiles
from ..partition.sample import draw_prefix_batch
from ..renewal.mass import log_renewal_table
from ..stats import DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE, column_upper_bounds, run_samples

LOGGER = logging.getLogger(__name__)


def log_moment_samples(
    model: ModelSpec,
    k: int,
    n_samples: int,
    rng_seed: int,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NDArray[np.float64]:
    """log Z^c_i for i = 0..k-1, one row per disorder sample.

    A single DP pass per sample serves every i < k.
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    model.return_law.require(k - 1)
    top = k - 1

    def chunk(indices: range) -> NDArray[np.float64]:
        prefix = draw_prefix_batch(model.disorder, max(top, 1), rng_seed, indices)
        return extend_log_profiles(model, prefix, None, top)

    return run_samples(chunk, n_samples, workers=workers, chunk_size=chunk_size)


def fractional_moment_samples(
    model: ModelSpec,
    gamma: float,
    k: int,
    n_samples: int,
    rng_seed: int,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NDArray[np.float64]:
    """(Z^c_i)^gamma for i = 0..k-1, shape (n_samples, k)."""
    _check_gamma(gamma)
    logs = log_moment_samples(model, k, n_samples, rng_seed, workers, chunk_size)
    with np.errstate(over="ignore"):
        return np.exp(gamma * logs)


def fractional_moment_estimates(
    model: ModelSpec,
    gamma: float,
    k: int,
    n_samples: int,
    confidence: float = DEFAULT_CONFIDENCE,
    rng_seed: int = 0,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NDArray[np.float64]:
    """One-sided upper confidence bounds on A_0..A_{k-1}.

    Each column is rescaled by its largest sample before the mean and standard
    error are taken, so large moments do not overflow before they have to.
    A_0 = 1 exactly, and at lambda = 0 every A_i = u_i^gamma exactly.
    """
    _check_gamma(gamma)
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if model.lam == 0:
        return np.exp(gamma * log_renewal_table(model.return_law, k - 1)[:k])
    metrics = get_metrics()
    metrics.start("fractional_moments")
    logs = gamma * log_moment_samples(model, k, n_samples, rng_seed, workers, chunk_size)
    shift = logs.max(axis=0)
    upper = column_upper_bounds(np.exp(logs - shift), confidence)
    with np.errstate(over="ignore", divide="ignore"):
        bounds = np.exp(np.log(np.maximum(upper, 0.0)) + shift)
    bounds[0] = 1.0
    metrics.stop("fractional_moments", k=str(k), samples=str(n_samples))
    LOGGER.debug("Fractional moments gamma=%g k=%d: max upper bound %.6g", gamma, k, bounds.max())
    return bounds


def fractional_free_energy_bound(
    model: ModelSpec,
    gamma: float,
    n: int,
    n_samples: int,
    confidence: float = DEFAULT_CONFIDENCE,
    rng_seed: int = 0,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> float:
    """Upper confidence number for (1/N) E log Z^c_N through Jensen, (1/(gamma N)) log A_N."""
    if n < 1:
        raise DomainError(f"N must be positive, got {n}")
    bounds = fractional_moment_estimates(
        model, gamma, n + 1, n_samples, confidence, rng_seed, workers, chunk_size
    )
    top = float(bounds[n])
    if top <= 0:
        return -math.inf
    return math.log(top) / (gamma * n)


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
