"""B(j) weights of the fractional-moment recursion and certified sums of their tails.

B(j) = K(j)^gamma E[phi(lambda omega(0, j] + lambda h j)^gamma] with
phi(t) = (1 + e^-2t)/2. The universal mode uses (1 + x)^gamma <= 1 + x^gamma:

    B(j) <= K(j)^gamma 2^-gamma [exp(j (log M(-2 gamma lambda) - 2 gamma lambda h)) + 1].
"""

from __future__ import annotations

import logging
import math
import threading
import weakref
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

from ..bounds.quadrature import hermite_rule, laguerre_rule
from ..model.disorder import DisorderKind, annealed_exponent, h_m_curve
from ..model.exceptions import DomainError, PreconditionError
from ..model.laws import ReturnLaw
from ..model.spec import ModelSpec
from ..model.special import LOG2, log_phi

LOGGER = logging.getLogger(__name__)

RADEMACHER_EXACT_MAX = 30
DEFAULT_EXACT_HORIZON = 2**16
HERMITE_ORDER = 96
LAGUERRE_ORDER = 96
# Above this standard deviation of the excursion charge the Gaussian expectation
# is split into closed-form parts and two one-sided Laguerre remainders
GAUSS_HERMITE_SIGMA_MAX = 2.0

_TAIL_TABLES: "weakref.WeakKeyDictionary[ReturnLaw, dict[tuple, NDArray[np.float64]]]" = (
    weakref.WeakKeyDictionary()
)
_TAIL_LOCK = threading.Lock()


class WeightMode(str, Enum):
    """How B(j) is evaluated."""

    EXACT = "exact"
    UNIVERSAL = "universal"


def exact_mode_available(model: ModelSpec, j: int) -> bool:
    """Whether exact mode at ``j`` is computed exactly rather than by the universal bound."""
    if model.lam == 0 or model.disorder.is_gaussian:
        return True
    return j <= RADEMACHER_EXACT_MAX


def effective_mode(model: ModelSpec, j: int, mode: WeightMode | str) -> WeightMode:
    """The mode actually used for ``b_weight(model, gamma, j, mode)``."""
    mode = WeightMode(mode)
    if mode is WeightMode.EXACT and not exact_mode_available(model, j):
        return WeightMode.UNIVERSAL
    return mode


def b_weight(
    model: ModelSpec, gamma: float, j: int, mode: WeightMode | str = WeightMode.EXACT
) -> float:
    """B(j) in the requested mode.

    Exact mode for Rademacher charges is only available up to j = 30; beyond
    that the universal bound is returned and a warning is logged.
    """
    _check_gamma(gamma)
    if j < 1:
        raise DomainError(f"B(j) is defined for j >= 1, got {j}")
    model.return_law.require(j)
    used = effective_mode(model, j, mode)
    if used is not WeightMode(mode):
        LOGGER.warning(
            "Exact B(%d) for Rademacher charges needs j <= %d; using the universal bound",
            j,
            RADEMACHER_EXACT_MAX,
        )
    return float(b_weights(model, gamma, np.array([j]), used)[0])


def b_weights(
    model: ModelSpec,
    gamma: float,
    js: ArrayLike,
    mode: WeightMode | str = WeightMode.EXACT,
) -> NDArray[np.float64]:
    """Vectorized B(j).

    Entries where exact mode is unavailable silently use the universal bound,
    which keeps every entry an upper bound on the true weight.
    """
    _check_gamma(gamma)
    j = np.asarray(js, dtype=np.int64).ravel()
    if j.size == 0:
        return np.zeros(0)
    if np.any(j < 1):
        raise DomainError("B(j) is defined for j >= 1")
    model.return_law.require(int(j.max()))
    log_k = gamma * model.return_law.log_mass[j]
    log_universal = _log_universal_factor(model, gamma, j)
    if WeightMode(mode) is WeightMode.UNIVERSAL:
        with np.errstate(over="ignore"):
            return np.exp(log_k + log_universal)
    if model.lam == 0:
        return np.exp(log_k)
    if model.disorder.kind is DisorderKind.GAUSSIAN:
        log_factor = _log_gaussian_factor(model, gamma, j)
    else:
        log_factor = log_universal.copy()
        small = j <= RADEMACHER_EXACT_MAX
        log_factor[small] = [_log_rademacher_factor(model, gamma, int(n)) for n in j[small]]
    with np.errstate(over="ignore"):
        return np.exp(log_k + log_factor)


def b_tail_upper(
    model: ModelSpec,
    gamma: float,
    m: int,
    exact_horizon: int | None = None,
) -> float:
    """Certified upper bound on sum_{j >= m} B(j).

    Exact-mode weights are summed for m <= j < J0 with J0 = min(exact_horizon,
    n_max). Past J0 each weight is bounded through the universal mode and the
    law's tail supremum S(M) >= sup_{j >= M} j^(1+alpha) K(j), which gives

        2^-gamma (1 + e^{M r}) S(M)^gamma [M^-p + M^(1-p) / (p - 1)]

    with p = (1 + alpha) gamma, r the universal exponent and M = max(m, J0).

    Raises:
        PreconditionError: If (1 + alpha) gamma <= 1 or h < h^(gamma)(lambda).
    """
    _check_gamma(gamma)
    if m < 1:
        raise DomainError(f"tail index must be positive, got {m}")
    law = model.return_law
    p = (1.0 + law.alpha) * gamma
    if p <= 1.0:
        raise PreconditionError("(1+alpha)*gamma > 1", p, 1.0)
    rate = annealed_exponent(model.disorder, model.lam, model.h, m=gamma)
    if model.lam > 0 and rate > 0:
        raise PreconditionError(
            "h >= h^(gamma)(lambda)", model.h, h_m_curve(model.disorder, gamma, model.lam)
        )
    horizon = min(exact_horizon or DEFAULT_EXACT_HORIZON, law.n_max)
    suffix = _suffix_table(model, gamma, horizon)
    exact_part = float(suffix[m]) if m < horizon else 0.0
    top = max(m, horizon)
    envelope = 2.0 ** (-gamma) * (1.0 + math.exp(top * min(rate, 0.0)))
    power = top ** (-p) + top ** (1.0 - p) / (p - 1.0)
    remainder = envelope * law.tail_sup(top) ** gamma * power
    return exact_part + remainder


def clear_tail_cache() -> None:
    with _TAIL_LOCK:
        _TAIL_TABLES.clear()


def _suffix_table(model: ModelSpec, gamma: float, horizon: int) -> NDArray[np.float64]:
    """suffix[m] = sum_{m <= j < horizon} B(j), for 0 <= m <= horizon."""
    key = (model.disorder.kind, model.lam, model.h, gamma, horizon)
    with _TAIL_LOCK:
        tables = _TAIL_TABLES.setdefault(model.return_law, {})
        cached = tables.get(key)
    if cached is not None:
        return cached
    weights = np.zeros(horizon + 1)
    if horizon > 1:
        weights[1:horizon] = b_weights(model, gamma, np.arange(1, horizon))
    suffix = np.cumsum(weights[::-1])[::-1]
    suffix.setflags(write=False)
    LOGGER.debug(
        "B tail table: lambda=%g h=%g gamma=%g up to j=%d", model.lam, model.h, gamma, horizon
    )
    with _TAIL_LOCK:
        _TAIL_TABLES.setdefault(model.return_law, {})[key] = suffix
    return suffix


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")


def _log_universal_factor(
    model: ModelSpec, gamma: float, j: NDArray[np.int64]
) -> NDArray[np.float64]:
    rate = annealed_exponent(model.disorder, model.lam, model.h, m=gamma)
    return np.logaddexp(j * rate, 0.0) - gamma * LOG2


def _log_rademacher_factor(model: ModelSpec, gamma: float, j: int) -> float:
    """log E[phi(lambda (2 Bin(j, 1/2) - j) + lambda h j)^gamma], exactly."""
    b = np.arange(j + 1)
    log_pmf = stats.binom.logpmf(b, j, 0.5)
    charge = model.lam * (2.0 * b - j) + model.lam * model.h * j
    return float(special.logsumexp(log_pmf + gamma * log_phi(charge)))


def _log_gaussian_factor(
    model: ModelSpec, gamma: float, j: NDArray[np.int64]
) -> NDArray[np.float64]:
    """log E[phi(t)^gamma] for t ~ N(lambda h j, lambda^2 j)."""
    mu = model.lam * model.h * j.astype(np.float64)
    sigma = model.lam * np.sqrt(j.astype(np.float64))
    out = np.empty(j.size)
    narrow = sigma <= GAUSS_HERMITE_SIGMA_MAX
    if np.any(narrow):
        nodes, weights = hermite_rule(HERMITE_ORDER)
        t = mu[narrow, None] + sigma[narrow, None] * nodes[None, :]
        out[narrow] = special.logsumexp(gamma * log_phi(t), b=weights[None, :], axis=1)
    wide = ~narrow
    if np.any(wide):
        out[wide] = _log_split_expectation(mu[wide], sigma[wide], gamma) - gamma * LOG2
    return out


def _log_split_expectation(
    mu: NDArray[np.float64], sigma: NDArray[np.float64], gamma: float
) -> NDArray[np.float64]:
    """log E[(1 + e^-2t)^gamma] for t ~ N(mu, sigma^2) with sigma > 2.

    (1 + e^-2t)^gamma = max(1, e^-2 gamma t) (1 + q(|t|)) where
    q(s) = (1 + e^-2s)^gamma - 1 decays like e^-2s. The max part has a closed
    form; the q part lives near t = 0 and is integrated on each side by a
    Laguerre rule matched to its decay rate.
    """
    ratio = mu / sigma
    log_main = np.logaddexp(
        special.log_ndtr(ratio),
        -2.0 * gamma * mu
        + 2.0 * gamma**2 * sigma**2
        + special.log_ndtr((2.0 * gamma * sigma**2 - mu) / sigma),
    )
    y, w = laguerre_rule(LAGUERRE_ORDER)
    # t > 0: q(s) = e^-2s g(s)
    s_right = y[None, :] / 2.0
    right = (w[None, :] * _excess_ratio(s_right, gamma) * _normal_pdf(s_right, mu, sigma)).sum(
        axis=1
    ) / 2.0
    # t < 0: e^(2 gamma s) q(s) = e^-(a s) g(s) with a = 2(1 - gamma), integrated at
    # rate b = max(a, 1/sigma) against e^((b - a) s) g(s) pdf(-s)
    a = 2.0 * (1.0 - gamma)
    b = np.maximum(a, 1.0 / sigma)[:, None]
    s_left = y[None, :] / b
    with np.errstate(over="ignore", under="ignore"):
        integrand = (
            _excess_ratio(s_left, gamma)
            * np.exp((b - a) * s_left + _normal_logpdf(-s_left, mu, sigma))
        )
    left = (w[None, :] * integrand).sum(axis=1) / b[:, 0]
    with np.errstate(divide="ignore"):
        return np.logaddexp(log_main, np.log(right + left))


def _excess_ratio(s: NDArray[np.float64], gamma: float) -> NDArray[np.float64]:
    """g(s) = e^2s ((1 + e^-2s)^gamma - 1), between 2^gamma - 1 and gamma."""
    x = np.exp(-2.0 * s)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, np.expm1(gamma * np.log1p(x)) / safe, gamma)


def _normal_logpdf(
    t: NDArray[np.float64], mu: NDArray[np.float64], sigma: NDArray[np.float64]
) -> NDArray[np.float64]:
    z = (t - mu[:, None]) / sigma[:, None]
    return -0.5 * z * z - np.log(sigma[:, None]) - 0.5 * math.log(2.0 * math.pi)


def _normal_pdf(
    t: NDArray[np.float64], mu: NDArray[np.float64], sigma: NDArray[np.float64]
) -> NDArray[np.float64]:
    return np.exp(_normal_logpdf(t, mu, sigma))
