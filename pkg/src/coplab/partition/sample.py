"""Quenched disorder samples with prefix sums for window charges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..model.disorder import DisorderLaw
from ..model.exceptions import DomainError
from ..stats import sample_rng


@dataclass(frozen=True, eq=False)
class DisorderSample:
    """Charges omega_1..omega_N and prefix sums with prefix[0] = 0.

    omega(i, j] = prefix[j] - prefix[i].
    """

    omega: NDArray[np.float64]
    prefix: NDArray[np.float64]
    seed_id: tuple[int, int] = (-1, -1)

    @classmethod
    def from_omega(cls, omega: ArrayLike, seed_id: tuple[int, int] = (-1, -1)) -> "DisorderSample":
        values = np.array(omega, dtype=np.float64).ravel()
        prefix = np.concatenate(([0.0], np.cumsum(values)))
        values.setflags(write=False)
        prefix.setflags(write=False)
        return cls(omega=values, prefix=prefix, seed_id=seed_id)

    @classmethod
    def draw(cls, disorder: DisorderLaw, n: int, seed: int, index: int) -> "DisorderSample":
        """Sample ``index`` of the run seeded with ``seed``."""
        if n < 1:
            raise DomainError(f"sample length must be positive, got {n}")
        rng = sample_rng(seed, index)
        return cls.from_omega(disorder.sample(rng, n), seed_id=(seed, index))

    def __len__(self) -> int:
        return int(self.omega.size)

    def window(self, start: int, stop: int) -> "DisorderSample":
        """The shifted sample omega_{start+1}..omega_{stop}."""
        if not 0 <= start <= stop <= len(self):
            raise DomainError(f"window ({start}, {stop}] outside sample of length {len(self)}")
        return DisorderSample.from_omega(self.omega[start:stop], self.seed_id)

    def reversed(self) -> "DisorderSample":
        return DisorderSample.from_omega(self.omega[::-1], self.seed_id)


def draw_prefix_batch(
    disorder: DisorderLaw, n: int, seed: int, indices: range
) -> NDArray[np.float64]:
    """Prefix sums of samples ``indices``, stacked to shape (len(indices), n + 1)."""
    out = np.zeros((len(indices), n + 1))
    for row, index in enumerate(indices):
        out[row, 1:] = np.cumsum(disorder.sample(sample_rng(seed, index), n))
    return out
