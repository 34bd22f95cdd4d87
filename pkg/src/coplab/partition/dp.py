"""Log-space dynamic programming for the quenched partition functions.

The constrained recursion is

    Z^c_n = sum_{i<n} Z^c_i K(n - i) phi(lambda omega(i, n] + lambda h (n - i)),

evaluated with a log-sum-exp per target index. The batch variant runs the
same recursion on a stack of samples at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from ..model.exceptions import DomainError
from ..model.spec import ModelSpec
from ..model.special import log_phi
from .sample import DisorderSample


@dataclass(frozen=True, eq=False)
class ConstrainedLogZProfile:
    """values[i] = log Z^c_i for i = 0..N on one sample."""

    values: NDArray[np.float64]
    model: ModelSpec

    @property
    def n(self) -> int:
        return int(self.values.size - 1)

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])


def constrained_logZ_profile(
    model: ModelSpec, sample: DisorderSample, n: int
) -> ConstrainedLogZProfile:
    """log Z^c_0..log Z^c_N on ``sample``."""
    _check_length(model, sample, n)
    values = extend_log_profiles(model, sample.prefix[None, : n + 1], None, n)[0]
    values.setflags(write=False)
    return ConstrainedLogZProfile(values=values, model=model)


def extend_log_profiles(
    model: ModelSpec,
    prefix: NDArray[np.float64],
    profiles: NDArray[np.float64] | None,
    n: int,
) -> NDArray[np.float64]:
    """Run or continue the constrained recursion for a batch of samples.

    Args:
        model: Law, disorder and coupling
        prefix: Prefix sums, shape (batch, >= n + 1)
        profiles: Profiles already computed up to some m < n, shape
            (batch, m + 1), or None to start from log Z^c_0 = 0
        n: Target length

    Returns:
        Array of shape (batch, n + 1) with log Z^c_i in column i.
    """
    model.return_law.require(n)
    batch = prefix.shape[0]
    out = np.empty((batch, n + 1))
    start = 1
    if profiles is None:
        out[:, 0] = 0.0
    else:
        start = profiles.shape[1]
        out[:, :start] = profiles
    lam, h = model.lam, model.h
    log_k = model.return_law.log_mass
    for m in range(start, n + 1):
        gaps = np.arange(m, 0, -1, dtype=np.float64)
        charge = lam * (prefix[:, m : m + 1] - prefix[:, :m]) + (lam * h) * gaps
        terms = out[:, :m] + log_k[m:0:-1] + log_phi(charge)
        out[:, m] = logsumexp(terms, axis=1)
    return out


def free_logZ_from_profile(
    model: ModelSpec, prefix: NDArray[np.float64], profiles: NDArray[np.float64], n: int
) -> NDArray[np.float64]:
    """log Z_N for a batch, closing the constrained profiles with an open excursion.

    Z_N = sum_{i<=N} Z^c_i Kbar(N - i) phi(lambda omega(i, N] + lambda h (N - i)).
    """
    lam, h = model.lam, model.h
    gaps = np.arange(n, -1, -1, dtype=np.float64)
    charge = lam * (prefix[:, n : n + 1] - prefix[:, : n + 1]) + (lam * h) * gaps
    log_tail = model.return_law.log_tail[n::-1]
    return logsumexp(profiles[:, : n + 1] + log_tail + log_phi(charge), axis=1)


def free_logZ(model: ModelSpec, sample: DisorderSample, n: int) -> float:
    """log Z_N, the partition function whose last excursion may be unfinished."""
    profile = constrained_logZ_profile(model, sample, n)
    return float(
        free_logZ_from_profile(model, sample.prefix[None, :], profile.values[None, :], n)[0]
    )


def _check_length(model: ModelSpec, sample: DisorderSample, n: int) -> None:
    if n < 1:
        raise DomainError(f"N must be positive, got {n}")
    model.return_law.require(n)
    if len(sample) < n:
        raise DomainError(f"sample of length {len(sample)} is shorter than N={n}")
