"""Sampling renewal trajectories with their excursion signs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..model.exceptions import DomainError
from ..model.laws import ReturnLaw
from .mass import renewal_table


@dataclass(frozen=True)
class RenewalPath:
    """Renewal points 0 = tau_0 < tau_1 < ... covering [0, horizon].

    ``signs[j]`` is the sign of the excursion (points[j], points[j+1]]; a sign
    of -1 puts the excursion below the interface, so Delta_n = (1 - s_j)/2 on
    it. Unconditioned paths end at the first point >= horizon.
    """

    points: NDArray[np.int64]
    signs: NDArray[np.int8]
    horizon: int
    conditioned: bool = False

    @property
    def complete(self) -> bool:
        return bool(self.points[-1] >= self.horizon)

    @property
    def increments(self) -> NDArray[np.int64]:
        return np.diff(self.points)

    def renewal_count(self) -> int:
        """Y_N = max{n : tau_n <= N}."""
        return int(np.searchsorted(self.points, self.horizon, side="right") - 1)

    def negative_occupation(self) -> int:
        """sum_{n <= N} Delta_n, accumulated excursion by excursion."""
        ends = np.minimum(self.points[1:], self.horizon)
        lengths = np.maximum(ends - self.points[:-1], 0)
        return int(lengths[self.signs < 0].sum())

    def delta(self) -> NDArray[np.int8]:
        """Delta_1..Delta_N as a 0/1 array."""
        out = np.zeros(self.horizon, dtype=np.int8)
        for start, stop, sign in zip(self.points[:-1], self.points[1:], self.signs):
            if sign < 0 and start < self.horizon:
                out[start : min(stop, self.horizon)] = 1
        return out


def sample_path(law: ReturnLaw, n: int, rng: np.random.Generator) -> RenewalPath:
    """IID increments drawn until the horizon ``n`` is covered, with uniform signs."""
    if n < 1:
        raise DomainError(f"horizon must be positive, got {n}")
    mean = law.mean_return_time()
    batch = int(min(max(n / mean if np.isfinite(mean) else 64, 16) * 1.2 + 16, 1 << 20))
    pieces: list[NDArray[np.int64]] = []
    total = 0
    while total < n:
        draws = law.sample_increments(rng, batch)
        sums = np.cumsum(draws) + total
        stop = int(np.searchsorted(sums, n, side="left"))
        if stop < draws.size:
            pieces.append(draws[: stop + 1])
            total = int(sums[stop])
        else:
            pieces.append(draws)
            total = int(sums[-1])
    points = np.concatenate(([0], np.cumsum(np.concatenate(pieces)))).astype(np.int64)
    signs = _draw_signs(rng, points.size - 1)
    return RenewalPath(points=points, signs=signs, horizon=n)


def sample_conditioned(law: ReturnLaw, n: int, rng: np.random.Generator) -> RenewalPath:
    """Exact backward sampling of a path with n in tau.

    From the endpoint m the previous point is i with probability
    K(m - i) u_i / u_m, repeated until 0 is reached.
    """
    if n < 1:
        raise DomainError(f"horizon must be positive, got {n}")
    law.require(n)
    u = renewal_table(law, n)
    mass = law.mass_table
    points = [n]
    m = n
    while m > 0:
        weights = mass[m:0:-1] * u[:m]
        cdf = np.cumsum(weights)
        i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        m = min(i, m - 1)
        points.append(m)
    path = np.asarray(points[::-1], dtype=np.int64)
    return RenewalPath(
        points=path, signs=_draw_signs(rng, path.size - 1), horizon=n, conditioned=True
    )


def renewal_count(path: RenewalPath, n: int | None = None) -> int:
    """Number of renewal points in (0, n] (n defaults to the path horizon)."""
    horizon = path.horizon if n is None else n
    return int(np.searchsorted(path.points, horizon, side="right") - 1)


def _draw_signs(rng: np.random.Generator, count: int) -> NDArray[np.int8]:
    return (2 * rng.integers(0, 2, size=count) - 1).astype(np.int8)
