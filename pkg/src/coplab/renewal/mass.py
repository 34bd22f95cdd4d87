"""Renewal mass function u_n = P(n in tau)."""

from __future__ import annotations

import logging
import threading
import weakref

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from ..model.exceptions import DomainError
from ..model.laws import ReturnLaw

LOGGER = logging.getLogger(__name__)

UNDERFLOW_THRESHOLD = 1e-300

_TABLES: "weakref.WeakKeyDictionary[ReturnLaw, NDArray[np.float64]]" = (
    weakref.WeakKeyDictionary()
)
_LOCK = threading.Lock()


def renewal_mass(law: ReturnLaw, n: int) -> float:
    """Return u_n for 0 <= n <= law.n_max."""
    if n < 0:
        raise DomainError(f"renewal index must be nonnegative, got {n}")
    law.require(n)
    return float(renewal_table(law, n)[n])


def renewal_table(law: ReturnLaw, n: int) -> NDArray[np.float64]:
    """u_0..u_m for some m >= n, cached per law and grown on demand."""
    law.require(n)
    with _LOCK:
        table = _TABLES.get(law)
        if table is None or table.size <= n:
            table = _extend(law, table, n)
            _TABLES[law] = table
    return table


def log_renewal_table(law: ReturnLaw, n: int) -> NDArray[np.float64]:
    """log u_0..log u_n, recomputed in log space when the linear table underflows."""
    table = renewal_table(law, n)[: n + 1]
    if np.all(table > UNDERFLOW_THRESHOLD):
        return np.log(table)
    LOGGER.warning(
        "Renewal masses below %.0e; recomputing up to n=%d in log space", UNDERFLOW_THRESHOLD, n
    )
    return _log_convolution(law, n)


def convolution_residual(law: ReturnLaw, n: int) -> float:
    """max_m |u_m - sum_{j<=m} K(j) u_{m-j}| over 1..n, recomputed independently."""
    u = renewal_table(law, n)[: n + 1]
    k = law.mass_table[: n + 1]
    full = np.convolve(k, u)[: n + 1]
    return float(np.max(np.abs(full[1:] - u[1:]), initial=0.0))


def _extend(
    law: ReturnLaw, table: NDArray[np.float64] | None, n: int
) -> NDArray[np.float64]:
    # Grow geometrically
    target = min(law.n_max, max(n, 2 * (table.size if table is not None else 0), 64))
    u = np.zeros(target + 1)
    start = 1
    if table is not None:
        u[: table.size] = table
        start = table.size
    else:
        u[0] = 1.0
    k = law.mass_table
    for m in range(start, target + 1):
        u[m] = np.dot(k[1 : m + 1], u[m - 1 :: -1])
    LOGGER.debug("Renewal table for %s extended to n=%d", law.kind.value, target)
    u.setflags(write=False)
    return u


def _log_convolution(law: ReturnLaw, n: int) -> NDArray[np.float64]:
    log_k = law.log_mass
    log_u = np.full(n + 1, -np.inf)
    log_u[0] = 0.0
    for m in range(1, n + 1):
        log_u[m] = logsumexp(log_k[1 : m + 1] + log_u[m - 1 :: -1])
    return log_u
