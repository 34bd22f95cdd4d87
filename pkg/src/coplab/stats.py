"""Monte Carlo plumbing: estimates with confidence bounds and deterministic sampling.

Every stochastic quantity is reported as an :class:`MCEstimate`. Samples are
seeded per index from (run seed, sample index) with a counter-based Philox
generator, so a sample's disorder never depends on which worker drew it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from .model.exceptions import DomainError

LOGGER = logging.getLogger(__name__)

DEFAULT_CONFIDENCE = 0.99
DEFAULT_CHUNK_SIZE = 64


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error and the confidence level of its bounds."""

    mean: float
    stderr: float
    n_samples: int
    confidence: float = DEFAULT_CONFIDENCE

    def __post_init__(self) -> None:
        if not 0.0 < self.confidence < 1.0:
            raise DomainError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.n_samples < 1:
            raise DomainError(f"an estimate needs at least one sample, got {self.n_samples}")
        if self.stderr < 0:
            raise DomainError(f"standard error must be nonnegative, got {self.stderr}")

    @classmethod
    def from_samples(
        cls, values: ArrayLike, confidence: float = DEFAULT_CONFIDENCE
    ) -> "MCEstimate":
        """Mean and stderr = sample standard deviation / sqrt(n)."""
        data = np.asarray(values, dtype=np.float64).ravel()
        n = data.size
        if n == 0:
            raise DomainError("cannot estimate from an empty sample")
        mean = float(np.mean(data))
        stderr = float(np.std(data, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean=mean, stderr=stderr, n_samples=n, confidence=confidence)

    @classmethod
    def exact(
        cls, value: float, n_samples: int = 1, confidence: float = DEFAULT_CONFIDENCE
    ) -> "MCEstimate":
        """A deterministic value carried in estimate form (stderr 0)."""
        return cls(mean=float(value), stderr=0.0, n_samples=n_samples, confidence=confidence)

    @property
    def quantile(self) -> float:
        return one_sided_quantile(self.confidence)

    def lower(self) -> float:
        """One-sided lower confidence bound, mean - z * stderr."""
        return self.mean - self.quantile * self.stderr

    def upper(self) -> float:
        """One-sided upper confidence bound, mean + z * stderr."""
        return self.mean + self.quantile * self.stderr

    def scaled(self, factor: float) -> "MCEstimate":
        """The estimate of ``factor`` times the estimand."""
        return MCEstimate(
            self.mean * factor, self.stderr * abs(factor), self.n_samples, self.confidence
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "MCEstimate":
        return cls(
            mean=float(payload["mean"]),
            stderr=float(payload["stderr"]),
            n_samples=int(payload["n_samples"]),
            confidence=float(payload.get("confidence", DEFAULT_CONFIDENCE)),
        )


def one_sided_quantile(confidence: float) -> float:
    """Standard normal quantile z with P(Z <= z) = confidence."""
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence}")
    return float(special.ndtri(confidence))


def column_upper_bounds(samples: NDArray[np.float64], confidence: float) -> NDArray[np.float64]:
    """Per-column mean + z * stderr for a (n_samples, m) array."""
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    if n < 2:
        return mean
    stderr = samples.std(axis=0, ddof=1) / math.sqrt(n)
    return mean + one_sided_quantile(confidence) * stderr


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index`` of the run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def derive_seed(seed: int, *keys: int) -> int:
    """A child run seed for a sub-computation identified by integer keys."""
    state = np.random.SeedSequence([seed, *keys]).generate_state(1, dtype=np.uint32)
    return int(state[0])


def chunk_ranges(n_samples: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[range]:
    """Split 0..n_samples-1 into consecutive ranges of ``chunk_size`` indices."""
    if chunk_size < 1:
        raise DomainError(f"chunk size must be positive, got {chunk_size}")
    return [
        range(start, min(start + chunk_size, n_samples))
        for start in range(0, n_samples, chunk_size)
    ]


def run_samples(
    fn: Callable[[range], NDArray[np.float64]],
    n_samples: int,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NDArray[np.float64]:
    """Evaluate ``fn`` chunk by chunk and stack the results in index order.

    ``fn`` receives a range of sample indices and returns an array whose first
    axis matches that range. Chunk boundaries depend only on ``chunk_size``,
    so the output is bit-identical for any ``workers``.
    """
    if n_samples < 1:
        raise DomainError(f"need at least one sample, got {n_samples}")
    chunks = chunk_ranges(n_samples, chunk_size)
    if workers <= 1 or len(chunks) == 1:
        parts: Sequence[NDArray[np.float64]] = [fn(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    LOGGER.debug("Evaluated %d samples in %d chunks", n_samples, len(chunks))
    return np.concatenate(parts, axis=0)
