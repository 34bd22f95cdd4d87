"""Laplace functionals of the negative-side occupation and renewal-count statistics."""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from ..model.exceptions import DomainError
from ..model.laws import ReturnLaw
from ..stats import DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE, MCEstimate, run_samples, sample_rng
from .paths import renewal_count, sample_conditioned, sample_path

LOGGER = logging.getLogger(__name__)


def occupation_samples(
    law: ReturnLaw,
    n: int,
    n_samples: int,
    conditioned: bool,
    rng_seed: int,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NDArray[np.float64]:
    """Per-path fractions (1/N) sum_{k<=N} Delta_k, one path per sample index."""
    sampler = sample_conditioned if conditioned else sample_path

    def chunk(indices: range) -> NDArray[np.float64]:
        out = np.empty(len(indices))
        for slot, index in enumerate(indices):
            path = sampler(law, n, sample_rng(rng_seed, index))
            out[slot] = path.negative_occupation() / n
        return out

    return run_samples(chunk, n_samples, workers=workers, chunk_size=chunk_size)


def delta_laplace(
    law: ReturnLaw,
    n: int,
    q: float,
    n_samples: int,
    conditioned: bool = False,
    rng_seed: int = 0,
    confidence: float = DEFAULT_CONFIDENCE,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> MCEstimate:
    """Estimate E[exp(-(q/N) sum_{k<=N} Delta_k)], optionally given N in tau.

    Paths depend only on (rng_seed, sample index), so estimates at several q
    from the same seed share their random numbers and are pathwise monotone.
    """
    if q < 0:
        raise DomainError(f"q must be nonnegative, got {q}")
    if q == 0:
        return MCEstimate.exact(1.0, n_samples, confidence)
    fractions = occupation_samples(
        law, n, n_samples, conditioned, rng_seed, workers=workers, chunk_size=chunk_size
    )
    estimate = MCEstimate.from_samples(np.exp(-q * fractions), confidence)
    LOGGER.debug(
        "Laplace functional N=%d q=%g conditioned=%s: %.6f +- %.2g",
        n,
        q,
        conditioned,
        estimate.mean,
        estimate.stderr,
    )
    return estimate


def delta_laplace_curve(
    law: ReturnLaw,
    n: int,
    q_values: list[float],
    n_samples: int,
    conditioned: bool = False,
    rng_seed: int = 0,
    confidence: float = DEFAULT_CONFIDENCE,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> list[MCEstimate]:
    """Laplace functional at several q from one set of paths."""
    if any(q < 0 for q in q_values):
        raise DomainError("q values must be nonnegative")
    fractions = occupation_samples(
        law, n, n_samples, conditioned, rng_seed, workers=workers, chunk_size=chunk_size
    )
    return [
        MCEstimate.exact(1.0, n_samples, confidence)
        if q == 0
        else MCEstimate.from_samples(np.exp(-q * fractions), confidence)
        for q in q_values
    ]


def renewal_count_scaling(
    law: ReturnLaw, n: int, n_paths: int, rng_seed: int = 0
) -> float:
    """Median of Y_N / N^alpha over independent unconditioned paths."""
    counts = np.empty(n_paths)
    for index in range(n_paths):
        path = sample_path(law, n, sample_rng(rng_seed, index))
        counts[index] = renewal_count(path, n)
    return float(np.median(counts)) / math.pow(n, law.alpha)
