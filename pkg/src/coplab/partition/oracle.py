"""Exhaustive enumeration of renewal configurations, used as an independent oracle."""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from ..metrics import ORACLE_BUDGET_S, get_metrics
from ..model.exceptions import CostGuardError, DomainError
from ..model.spec import ModelSpec
from ..model.special import LOG2, log_phi
from .sample import DisorderSample

LOGGER = logging.getLogger(__name__)

MAX_ORACLE_N = 16
MAX_EXPLICIT_SIGNS_N = 12


def brute_force_logZ(
    model: ModelSpec,
    sample: DisorderSample,
    n: int,
    constrained: bool = True,
    explicit_signs: bool = False,
) -> float:
    """log Z^c_N (or log Z_N) by enumerating every renewal set in {1..N}.

    With ``explicit_signs`` each excursion's sign is enumerated too, with
    weight 1/2 per excursion, instead of using the sign-integrated phi.

    Raises:
        CostGuardError: If N > 16, or N > 12 with explicit signs.
    """
    if n < 1:
        raise DomainError(f"N must be positive, got {n}")
    if n > MAX_ORACLE_N:
        raise CostGuardError(f"brute force refused for N={n} > {MAX_ORACLE_N}")
    if explicit_signs and n > MAX_EXPLICIT_SIGNS_N:
        raise CostGuardError(
            f"explicit-sign enumeration refused for N={n} > {MAX_EXPLICIT_SIGNS_N}"
        )
    if len(sample) < n:
        raise DomainError(f"sample of length {len(sample)} is shorter than N={n}")
    model.return_law.require(n)
    metrics = get_metrics()
    metrics.start("brute_force_logZ")
    if explicit_signs:
        value = _enumerate_signs(model, sample, n, constrained)
    else:
        value = _enumerate_compositions(model, sample, n, constrained)
    event = metrics.stop("brute_force_logZ", n=str(n))
    if event is not None and event.exceeds_budget(ORACLE_BUDGET_S):
        LOGGER.warning("Brute force at N=%d took %.1fs", n, event.duration_s)
    return value


def _enumerate_compositions(
    model: ModelSpec, sample: DisorderSample, n: int, constrained: bool
) -> float:
    # bit p-1 of a code marks p as a renewal point
    codes = np.arange(1 << n, dtype=np.int64)
    if constrained:
        codes = codes[(codes >> (n - 1)) & 1 == 1]
    last = np.zeros(codes.size, dtype=np.int64)
    logw = np.zeros(codes.size)
    for pos in range(1, n + 1):
        hit = ((codes >> (pos - 1)) & 1) == 1
        start = last[hit]
        logw[hit] += model.return_law.log_mass[pos - start] + log_phi(
            _energy(model, sample, start, pos)
        )
        last[hit] = pos
    if not constrained:
        open_ = last < n
        start = last[open_]
        logw[open_] += model.return_law.log_tail[n - start] + log_phi(
            _energy(model, sample, start, n)
        )
    return float(logsumexp(logw))


def _enumerate_signs(
    model: ModelSpec, sample: DisorderSample, n: int, constrained: bool
) -> float:
    # base-3 digit per position: 0 no renewal, 1 closes a + excursion, 2 a - one;
    # in the free case digit n carries the sign of an unfinished last excursion
    width = n if constrained else n + 1
    codes = np.arange(3**width, dtype=np.int64)
    final = (codes // 3 ** (n - 1)) % 3
    if constrained:
        codes = codes[final != 0]
    else:
        open_sign = (codes // 3**n) % 3
        codes = codes[(open_sign != 0) & ((final == 0) | (open_sign == 1))]
    last = np.zeros(codes.size, dtype=np.int64)
    logw = np.zeros(codes.size)
    for pos in range(1, n + 1):
        digit = (codes // 3 ** (pos - 1)) % 3
        hit = digit != 0
        start = last[hit]
        energy = _energy(model, sample, start, pos)
        logw[hit] += model.return_law.log_mass[pos - start] - LOG2
        logw[hit] += np.where(digit[hit] == 2, -2.0 * energy, 0.0)
        last[hit] = pos
    if not constrained:
        open_ = last < n
        start = last[open_]
        energy = _energy(model, sample, start, n)
        negative = (codes[open_] // 3**n) % 3 == 2
        logw[open_] += model.return_law.log_tail[n - start] - LOG2
        logw[open_] += np.where(negative, -2.0 * energy, 0.0)
    return float(logsumexp(logw))


def _energy(
    model: ModelSpec, sample: DisorderSample, start: NDArray[np.int64], stop: int
) -> NDArray[np.float64]:
    """lambda omega(start, stop] + lambda h (stop - start)."""
    return model.lam * (sample.prefix[stop] - sample.prefix[start]) + model.lam * model.h * (
        stop - start
    )
