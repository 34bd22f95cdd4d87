"""Quenched free-energy Monte Carlo and the finite-volume localization certificate."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray

from ..metrics import LOCALIZATION_BUDGET_S, WallBudget, get_metrics
from ..model.exceptions import DomainError
from ..model.spec import ModelSpec
from ..renewal.mass import log_renewal_table
from ..stats import DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE, MCEstimate, run_samples
from .dp import extend_log_profiles, free_logZ_from_profile
from .sample import draw_prefix_batch

LOGGER = logging.getLogger(__name__)


class Verdict(str, Enum):
    """Outcome of a phase certificate."""

    LOCALIZED = "Localized"
    DELOCALIZED = "Delocalized"
    UNDECIDED = "Undecided"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class LocalizationVerdict:
    """Result of the one-sided localization test.

    ``estimate`` is the estimate of (1/N) E log Z^c_N at ``n_used``, the first
    N of the schedule whose lower bound is positive, or the last N tried.
    """

    verdict: Verdict
    n_used: int
    estimate: MCEstimate
    history: tuple[tuple[int, MCEstimate], ...] = field(default=(), repr=False)

    @property
    def localized(self) -> bool:
        return self.verdict is Verdict.LOCALIZED

    def to_record(self) -> dict[str, Any]:
        return {
            "certificate": "localization",
            "verdict": self.verdict.value,
            "n_used": self.n_used,
            "estimate": self.estimate.to_dict(),
            "history": [{"n": n, **est.to_dict()} for n, est in self.history],
        }


def log_partition_samples(
    model: ModelSpec,
    n: int,
    n_samples: int,
    rng_seed: int,
    constrained: bool = True,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NDArray[np.float64]:
    """log Z^c_N (or log Z_N) on samples 0..n_samples-1 of the run ``rng_seed``."""

    def chunk(indices: range) -> NDArray[np.float64]:
        prefix = draw_prefix_batch(model.disorder, n, rng_seed, indices)
        profiles = extend_log_profiles(model, prefix, None, n)
        if constrained:
            return profiles[:, n]
        return free_logZ_from_profile(model, prefix, profiles, n)

    return run_samples(chunk, n_samples, workers=workers, chunk_size=chunk_size)


def free_energy_estimate(
    model: ModelSpec,
    n: int,
    n_samples: int,
    rng_seed: int,
    confidence: float = DEFAULT_CONFIDENCE,
    constrained: bool = True,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> MCEstimate:
    """Estimate (1/N) E log Z^c_N (or of the free Z_N with ``constrained=False``).

    By super-additivity the constrained estimand is a lower bound on F(lambda, h).
    At lambda = 0 the value (1/N) log u_N (or 0 for Z_N) is returned exactly.
    """
    if n < 1:
        raise DomainError(f"N must be positive, got {n}")
    if model.lam == 0:
        value = float(log_renewal_table(model.return_law, n)[n]) / n if constrained else 0.0
        return MCEstimate.exact(value, n_samples, confidence)
    metrics = get_metrics()
    metrics.start("free_energy_estimate")
    values = log_partition_samples(
        model,
        n,
        n_samples,
        rng_seed,
        constrained=constrained,
        workers=workers,
        chunk_size=chunk_size,
    )
    estimate = MCEstimate.from_samples(values / n, confidence)
    metrics.stop("free_energy_estimate", n=str(n), samples=str(n_samples))
    return estimate


def localization_certificate(
    model: ModelSpec,
    n_schedule: Sequence[int],
    n_samples: int,
    confidence: float = DEFAULT_CONFIDENCE,
    rng_seed: int = 0,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    budget: WallBudget | None = None,
) -> LocalizationVerdict:
    """Localized at the first N whose lower confidence bound of E log Z^c_N is > 0.

    The same disorder samples are extended from one N of the schedule to the
    next, so the DP is run once up to the largest N reached. Never reports
    delocalization.
    """
    schedule = [int(n) for n in n_schedule]
    if not schedule:
        raise DomainError("empty N schedule")
    if any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise DomainError(f"N schedule must be positive and increasing, got {schedule}")
    n_top = schedule[-1]
    model.return_law.require(n_top)

    if model.lam == 0:
        log_u = log_renewal_table(model.return_law, n_top)
        exact = tuple(
            (n, MCEstimate.exact(float(log_u[n]) / n, n_samples, confidence)) for n in schedule
        )
        return LocalizationVerdict(Verdict.UNDECIDED, n_top, exact[-1][1], exact)

    metrics = get_metrics()
    metrics.start("localization_certificate")
    try:
        return _run_schedule(
            model, schedule, n_samples, confidence, rng_seed, workers, chunk_size, budget
        )
    finally:
        event = metrics.stop("localization_certificate", n_top=str(n_top))
        if event is not None and event.exceeds_budget(LOCALIZATION_BUDGET_S):
            LOGGER.warning(
                "Localization certificate took %.1fs (budget %.0fs)",
                event.duration_s,
                LOCALIZATION_BUDGET_S,
            )


def _run_schedule(
    model: ModelSpec,
    schedule: list[int],
    n_samples: int,
    confidence: float,
    rng_seed: int,
    workers: int,
    chunk_size: int,
    budget: WallBudget | None,
) -> LocalizationVerdict:
    chunks = _Chunks(model, schedule[-1], rng_seed)
    history: list[tuple[int, MCEstimate]] = []
    for n in schedule:
        values = run_samples(
            partial(chunks.extend, n=n),
            n_samples,
            workers=workers,
            chunk_size=chunk_size,
        )
        estimate = MCEstimate.from_samples(values / n, confidence)
        history.append((n, estimate))
        LOGGER.debug(
            "Localization probe lambda=%g h=%g N=%d: mean=%.6g lower=%.6g",
            model.lam,
            model.h,
            n,
            estimate.mean,
            estimate.lower(),
        )
        if estimate.lower() > 0:
            LOGGER.info("Localized at lambda=%g h=%g with N=%d", model.lam, model.h, n)
            return LocalizationVerdict(Verdict.LOCALIZED, n, estimate, tuple(history))
        if budget is not None and budget.exhausted():
            LOGGER.warning("Localization budget exhausted after N=%d", n)
            break
    last_n, last = history[-1]
    return LocalizationVerdict(Verdict.UNDECIDED, last_n, last, tuple(history))


class _Chunks:
    """Per-chunk disorder and DP state carried along an increasing N schedule."""

    def __init__(self, model: ModelSpec, n_top: int, rng_seed: int) -> None:
        self._model = model
        self._n_top = n_top
        self._seed = rng_seed
        self._state: dict[int, tuple[NDArray[np.float64], NDArray[np.float64] | None]] = {}

    def extend(self, indices: range, n: int) -> NDArray[np.float64]:
        prefix, profiles = self._state.get(indices.start, (None, None))
        if prefix is None:
            prefix = draw_prefix_batch(self._model.disorder, self._n_top, self._seed, indices)
        profiles = extend_log_profiles(self._model, prefix, profiles, n)
        self._state[indices.start] = (prefix, profiles)
        return profiles[:, n]

