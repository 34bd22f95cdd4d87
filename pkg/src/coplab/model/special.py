"""Numerically stable elementary functions of the excursion weight."""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

LOG2 = math.log(2.0)


def log_cosh(t: ArrayLike) -> NDArray[np.float64]:
    """Return log cosh(t) as |t| + log1p(exp(-2|t|)) - log 2.

    Safe for |t| up to the float64 range; symmetric to the last bit.
    """
    a = np.abs(np.asarray(t, dtype=np.float64))
    return a + np.log1p(np.exp(-2.0 * a)) - LOG2


def log_phi(t: ArrayLike) -> NDArray[np.float64]:
    """Return log phi(t) where phi(t) = (1 + exp(-2t)) / 2.

    phi is the sign-averaged weight of one excursion carrying charge t, so
    log phi(t) = -t + log cosh(t). Tends to -log 2 as t -> +inf and behaves
    like -2t - log 2 as t -> -inf.
    """
    x = np.asarray(t, dtype=np.float64)
    return -x + log_cosh(x)
