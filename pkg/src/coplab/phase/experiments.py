"""Numerical experiments behind the rare-stretch and heavy-head lower bounds."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from ..metrics import WallBudget
from ..model.disorder import DisorderLaw, h_m_curve
from ..model.exceptions import DomainError, UnsupportedModelError
from ..model.laws import ReturnLaw
from ..model.spec import ModelSpec
from ..partition.dp import extend_log_profiles
from ..partition.estimate import (
    LocalizationVerdict,
    free_energy_estimate,
    localization_certificate,
)
from ..partition.sample import draw_prefix_batch
from ..stats import DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE, MCEstimate, derive_seed, run_samples
from .scan import SearchBudget

LOGGER = logging.getLogger(__name__)

HEAVY_HEAD_N_MAX = 2**16
LDP_PILOT_SAMPLES = 256


class ExperimentKind(str, Enum):
    LDP_RATE = "ldp_rate"
    HEAVY_HEAD = "heavy_head"


class LdpMethod(str, Enum):
    """How p(ell) is estimated."""

    IMPORTANCE = "importance"
    DIRECT = "direct"


REQUIRED_PARAMETERS: dict[ExperimentKind, tuple[str, ...]] = {
    ExperimentKind.LDP_RATE: ("lambda", "h", "ell", "delta"),
    ExperimentKind.HEAVY_HEAD: ("alpha", "lambda", "epsilon", "head_schedule"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """An experiment kind, its named parameters and its seed."""

    kind: ExperimentKind
    parameters: Mapping[str, Any]
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ExperimentKind(self.kind))
        missing = [key for key in REQUIRED_PARAMETERS[self.kind] if key not in self.parameters]
        if missing:
            raise DomainError(
                f"{self.kind.value} experiment is missing parameters: {', '.join(missing)}"
            )

    def get(self, key: str, default: Any = None) -> Any:
        return self.parameters.get(key, default)


@dataclass(frozen=True)
class LdpRateResult:
    """Estimated large-deviation rate of a neutral stretch and what it buys."""

    rate_est: float
    target: float
    p_hat: MCEstimate
    f_ref: MCEstimate
    threshold: float
    free_energy_bound: float
    method: LdpMethod
    ell: int
    tilt: float = 0.0

    @property
    def rate_stderr(self) -> float:
        """Delta-method standard error of rate_est."""
        if self.p_hat.mean <= 0:
            return math.inf
        return self.p_hat.stderr / (self.p_hat.mean * self.ell)

    def to_record(self) -> dict[str, Any]:
        return {
            "experiment": ExperimentKind.LDP_RATE.value,
            "method": self.method.value,
            "ell": self.ell,
            "tilt": self.tilt,
            "rate_est": self.rate_est,
            "rate_stderr": self.rate_stderr,
            "target": self.target,
            "p_hat": self.p_hat.to_dict(),
            "f_ref": self.f_ref.to_dict(),
            "threshold": self.threshold,
            "free_energy_bound": self.free_energy_bound,
        }


def ldp_tilt(
    neutral: ModelSpec,
    h: float,
    ell: int,
    threshold: float,
    seed: int,
    n_pilot: int = LDP_PILOT_SAMPLES,
) -> float:
    """Smallest shift t in [0, h] for which the stretch event becomes typical.

    On a fixed pilot batch xi, the mean of (1/ell) log Z^c_ell(lambda, h - t; xi)
    is nondecreasing in t; t is where it crosses ``threshold``, clipped to [0, h].
    """
    if h <= 0:
        return 0.0
    prefix = draw_prefix_batch(neutral.disorder, ell, seed, range(n_pilot))

    def gap(t: float) -> float:
        log_z = extend_log_profiles(neutral.with_h(h - t), prefix, None, ell)[:, ell]
        return float(np.mean(log_z)) / ell - threshold

    if gap(0.0) >= 0:
        return 0.0
    if gap(h) <= 0:
        return h
    return float(optimize.bisect(gap, 0.0, h, xtol=1e-3))


def experiment_ldp_rate(
    law: ReturnLaw,
    lam: float,
    h: float,
    ell: int,
    delta: float,
    n_samples: int,
    seed: int,
    f_ref: MCEstimate | None = None,
    disorder: DisorderLaw | None = None,
    method: LdpMethod | str = LdpMethod.IMPORTANCE,
    confidence: float = DEFAULT_CONFIDENCE,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> LdpRateResult:
    """Estimate -(1/ell) log P(F_ell(lambda, h; omega) >= (1 - delta) F(lambda, 0)).

    F_ell is (1/ell) log Z^c_ell. The importance sampler draws xi ~ N(0, 1) and
    sets omega = xi - t, for which F_ell(lambda, h; omega) = F_ell(lambda, h - t; xi),
    and reweights by the exact likelihood ratio exp(t sum xi - ell t^2 / 2). The
    shift t comes from ``ldp_tilt``; the direct method is t = 0. Without
    ``f_ref`` the reference free energy is estimated at N = ell.
    """
    disorder = disorder or DisorderLaw()
    if not disorder.is_gaussian:
        raise UnsupportedModelError("the LDP experiment needs Gaussian charges")
    if ell < 1:
        raise DomainError(f"ell must be positive, got {ell}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    method = LdpMethod(method)
    neutral = ModelSpec.build(law, disorder, lam, 0.0)
    if f_ref is None:
        f_ref = free_energy_estimate(
            neutral,
            ell,
            n_samples,
            derive_seed(seed, 1),
            confidence,
            workers=workers,
            chunk_size=chunk_size,
        )
    threshold = (1.0 - delta) * f_ref.mean
    stream = derive_seed(seed, 2)
    tilt = 0.0
    if method is LdpMethod.IMPORTANCE:
        tilt = ldp_tilt(neutral, h, ell, threshold, derive_seed(seed, 4))
    tilted = neutral.with_h(h - tilt)

    def chunk(indices: range) -> NDArray[np.float64]:
        prefix = draw_prefix_batch(disorder, ell, stream, indices)
        log_z = extend_log_profiles(tilted, prefix, None, ell)[:, ell]
        hit = log_z / ell >= threshold
        weight = np.exp(tilt * prefix[:, ell] - 0.5 * ell * tilt * tilt)
        return np.where(hit, weight, 0.0)

    values = run_samples(chunk, n_samples, workers=workers, chunk_size=chunk_size)
    p_hat = MCEstimate.from_samples(values, confidence)
    probability = min(p_hat.mean, 1.0)
    rate = -math.log(probability) / ell if probability > 0 else math.inf
    bound = probability * (threshold - (1.0 + law.alpha) * h * h / 2.0)
    LOGGER.info(
        "LDP rate lambda=%g h=%g ell=%d (%s, tilt=%.4g): p=%.4g +- %.2g rate=%.5g target=%.5g",
        lam,
        h,
        ell,
        method.value,
        tilt,
        p_hat.mean,
        p_hat.stderr,
        rate,
        h * h / 2.0,
    )
    return LdpRateResult(
        rate_est=rate,
        target=h * h / 2.0,
        p_hat=p_hat,
        f_ref=f_ref,
        threshold=threshold,
        free_energy_bound=bound,
        method=method,
        ell=ell,
        tilt=tilt,
    )


@dataclass(frozen=True)
class HeavyHeadEntry:
    """Certification outcome for one return law."""

    head_size: int | None
    localized_at_target: bool
    n_used: int
    estimate: MCEstimate
    max_certified_h: float | None

    def to_record(self) -> dict[str, Any]:
        return {
            "head_size": self.head_size,
            "localized_at_target": self.localized_at_target,
            "n_used": self.n_used,
            "estimate": self.estimate.to_dict(),
            "max_certified_h": self.max_certified_h,
        }


@dataclass(frozen=True)
class HeavyHeadReport:
    alpha: float
    lam: float
    h_target: float
    h_step: float
    entries: tuple[HeavyHeadEntry, ...]
    baseline: HeavyHeadEntry
    flags: tuple[str, ...] = field(default=())

    @property
    def smallest_certifying_head(self) -> int | None:
        for entry in self.entries:
            if entry.localized_at_target:
                return entry.head_size
        return None

    def monotone(self) -> bool:
        """Max certifiable h nondecreasing in head size, up to one grid step."""
        levels = [entry.max_certified_h or 0.0 for entry in self.entries]
        return all(b >= a - self.h_step * (1.0 + 1e-9) for a, b in zip(levels, levels[1:]))

    def to_record(self) -> dict[str, Any]:
        return {
            "experiment": ExperimentKind.HEAVY_HEAD.value,
            "alpha": self.alpha,
            "lambda": self.lam,
            "h_target": self.h_target,
            "h_step": self.h_step,
            "smallest_certifying_head": self.smallest_certifying_head,
            "monotone": self.monotone(),
            "entries": [entry.to_record() for entry in self.entries],
            "baseline": self.baseline.to_record(),
            "flags": list(self.flags),
        }


def experiment_heavy_head(
    alpha: float,
    lam: float,
    epsilon: float,
    head_schedule: Sequence[int],
    budget: SearchBudget | None = None,
    seed: int = 0,
    disorder: DisorderLaw | None = None,
    h_step: float = 0.05,
    n_max: int = HEAVY_HEAD_N_MAX,
) -> HeavyHeadReport:
    """Localization at h = h^(1)(lambda) - epsilon for heavy-head laws of growing head.

    For each head size N0 the law has masses c/(n log^2(n+1)) up to N0 and a
    Zipf tail with exponent alpha beyond. Besides the verdict at the target h,
    the largest h on the grid 0, h_step, 2 h_step, ... certified Localized
    before the first failure is reported, for each law and for pure Zipf.
    """
    disorder = disorder or DisorderLaw()
    budget = budget or SearchBudget()
    h_upper = h_m_curve(disorder, 1.0, lam)
    if not 0.0 < epsilon < h_upper:
        raise DomainError(f"epsilon must lie in (0, h^(1)(lambda)) = (0, {h_upper:.6g})")
    if not h_step > 0:
        raise DomainError(f"h step must be positive, got {h_step}")
    h_target = h_upper - epsilon
    run_seed = derive_seed(seed, 3)
    flags: list[str] = []

    def _certify(model: ModelSpec, wall: WallBudget) -> LocalizationVerdict:
        return localization_certificate(
            model,
            budget.n_schedule,
            budget.n_samples,
            budget.confidence,
            run_seed,
            budget.workers,
            budget.chunk_size,
            wall,
        )

    def evaluate(law: ReturnLaw, head_size: int | None) -> HeavyHeadEntry:
        wall = WallBudget(budget.wall_budget_s)
        model = ModelSpec.build(law, disorder, lam, h_target)
        at_target = _certify(model, wall)
        best = None
        for h in np.arange(0.0, h_upper, h_step):
            if wall.exhausted():
                flags.append(f"budget_exhausted:{head_size}")
                break
            verdict = _certify(model.with_h(float(h)), wall)
            if not verdict.localized:
                break
            best = float(h)
        LOGGER.info(
            "Head N0=%s: localized at h=%.4g: %s, max certified h=%s",
            head_size,
            h_target,
            at_target.localized,
            best,
        )
        return HeavyHeadEntry(
            head_size=head_size,
            localized_at_target=at_target.localized,
            n_used=at_target.n_used,
            estimate=at_target.estimate,
            max_certified_h=best,
        )

    entries = tuple(
        evaluate(ReturnLaw.heavy_head(alpha, int(n0), n_max=n_max), int(n0))
        for n0 in head_schedule
    )
    baseline = evaluate(ReturnLaw.zipf(alpha, n_max), None)
    report = HeavyHeadReport(alpha, lam, h_target, h_step, entries, baseline, tuple(flags))
    if not report.monotone():
        LOGGER.warning("Max certifiable h is not monotone in the head size")
    return report


def run_experiment(
    config: ExperimentConfig,
    law: ReturnLaw | None = None,
    budget: SearchBudget | None = None,
    disorder: DisorderLaw | None = None,
) -> dict[str, Any]:
    """Run ``config`` and return its JSON-ready record."""
    if config.kind is ExperimentKind.LDP_RATE:
        result = experiment_ldp_rate(
            law or ReturnLaw.srw(),
            float(config.get("lambda")),
            float(config.get("h")),
            int(config.get("ell")),
            float(config.get("delta")),
            int(config.get("n_samples", 2000)),
            config.seed,
            disorder=disorder,
            method=config.get("method", LdpMethod.IMPORTANCE),
        )
        return result.to_record()
    report = experiment_heavy_head(
        float(config.get("alpha")),
        float(config.get("lambda")),
        float(config.get("epsilon")),
        [int(n0) for n0 in config.get("head_schedule")],
        budget,
        config.seed,
        disorder=disorder,
        h_step=float(config.get("h_step", 0.05)),
        n_max=int(config.get("n_max", HEAVY_HEAD_N_MAX)),
    )
    return report.to_record()
