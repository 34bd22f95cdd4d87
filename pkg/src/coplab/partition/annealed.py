"""Annealed partition functions and the first-point-after-k decomposition."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from ..model.disorder import annealed_exponent
from ..model.exceptions import DomainError
from ..model.spec import ModelSpec
from ..model.special import LOG2, log_phi
from .dp import constrained_logZ_profile
from .sample import DisorderSample


def annealed_log_profile(model: ModelSpec, n: int) -> NDArray[np.float64]:
    """log E[Z^c_i] for i = 0..N.

    Integrating the disorder excursion by excursion replaces phi with
    Phi(j) = (1 + exp(j r)) / 2 where r = log M(-2 lambda) - 2 lambda h.
    """
    if n < 0:
        raise DomainError(f"N must be nonnegative, got {n}")
    law = model.return_law
    law.require(n)
    rate = annealed_exponent(model.disorder, model.lam, model.h)
    j = np.arange(1, n + 1, dtype=np.float64)
    log_weight = np.full(n + 1, -np.inf)
    log_weight[1:] = law.log_mass[1 : n + 1] + np.logaddexp(0.0, j * rate) - LOG2
    values = np.empty(n + 1)
    values[0] = 0.0
    for m in range(1, n + 1):
        values[m] = logsumexp(values[:m] + log_weight[m:0:-1])
    return values


def annealed_constrained_logZ(model: ModelSpec, n: int) -> float:
    """log E_omega[Z^c_N]."""
    if n < 1:
        raise DomainError(f"N must be positive, got {n}")
    return float(annealed_log_profile(model, n)[n])


def annealed_free_energy(model: ModelSpec) -> float:
    """F_ann(lambda, h) = max(0, log M(-2 lambda) - 2 lambda h).

    The annealed renewal equation sum_n K(n) Phi(n) e^{-F n} = 1 has no root
    above the exponential growth rate of Phi when that rate is positive,
    because polynomial tails make the sum diverge just below it while it
    stays below 1 at it; the annealed free energy is then that rate.
    """
    rate = annealed_exponent(model.disorder, model.lam, model.h)
    return max(0.0, rate)


def decomposition_terms(
    model: ModelSpec, sample: DisorderSample, n: int, k: int
) -> NDArray[np.float64]:
    """Log terms of Z^c_N split by the last point i < k and first point j >= k.

    Entry (j - k) is log of Z_{j,N} sum_{i<k} K(j - i) phi(lambda omega(i, j]
    + lambda h (j - i)) Z^c_i, where Z_{j,N} is the constrained partition
    function of the window omega(j, N] (Z_{N,N} = 1). Their log-sum-exp is
    log Z^c_N.

    Z^c is invariant under reversing its window, so every Z_{j,N} is read off
    one profile of the reversed sample.
    """
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= N, got k={k}, N={n}")
    if len(sample) < n:
        raise DomainError(f"sample of length {len(sample)} is shorter than N={n}")
    head = constrained_logZ_profile(model, sample, n).values
    tail = constrained_logZ_profile(model, sample.window(0, n).reversed(), n).values
    lam, h = model.lam, model.h
    log_k = model.return_law.log_mass
    terms = np.empty(n - k + 1)
    i = np.arange(k)
    for j in range(k, n + 1):
        charge = lam * (sample.prefix[j] - sample.prefix[i]) + lam * h * (j - i)
        bridge = logsumexp(head[:k] + log_k[j - i] + log_phi(charge))
        terms[j - k] = bridge + tail[n - j]
    return terms
