"""The fractional-moment delocalization certificate and its parameter recipes.

With A_i = E[(Z^c_i)^gamma], fractional subadditivity applied to the split of
Z^c_N at the cut index k gives

    A_N <= sum_{j=k}^{N} A_{N-j} sum_{i<k} B(j - i) A_i,

so sup_N A_N is finite, and the free energy vanishes, as soon as

    U = sum_{i<k} A_i sum_{j>=k} B(j - i) <= 1.

U is evaluated with exact tail sums and Monte Carlo upper bounds on A_i; the
per-moment confidence is Bonferroni-adjusted so that all k bounds hold
together with the requested confidence.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..metrics import DELOCALIZATION_BUDGET_S, get_metrics
from ..model.disorder import annealed_exponent
from ..model.exceptions import DomainError, PreconditionError
from ..model.spec import ModelSpec
from ..partition.estimate import Verdict
from ..stats import DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE
from .moments import fractional_moment_estimates
from .weights import b_tail_upper

LOGGER = logging.getLogger(__name__)


class RecipeOrigin(str, Enum):
    """Where a (gamma, k) pair came from."""

    MANUAL = "manual"
    ALPHA_GT_1 = "alpha_gt_1"
    ALPHA_LE_1 = "alpha_le_1"


@dataclass(frozen=True)
class FracParams:
    """Fractional exponent gamma and cut index k."""

    gamma: float
    k: int
    recipe_origin: RecipeOrigin = RecipeOrigin.MANUAL

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.k < 1:
            raise DomainError(f"k must be positive, got {self.k}")

    def validate(self, alpha: float) -> None:
        """Raise PreconditionError unless (1 + alpha) gamma > 1."""
        p = (1.0 + alpha) * self.gamma
        if p <= 1.0:
            raise PreconditionError("(1+alpha)*gamma > 1", p, 1.0)

    def to_dict(self) -> dict[str, Any]:
        return {"gamma": self.gamma, "k": self.k, "recipe_origin": self.recipe_origin.value}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "FracParams":
        return cls(
            gamma=float(payload["gamma"]),
            k=int(payload["k"]),
            recipe_origin=RecipeOrigin(payload.get("recipe_origin", "manual")),
        )


def parameter_recipe(
    alpha: float, lam: float, knob: float, gamma_position: float = 0.5
) -> FracParams:
    """(gamma, k) from the weak-coupling recipes.

    For alpha > 1 the knob is rho in (2/(1+alpha), 1): k = floor(1/(lambda^2 (1 - rho)))
    and gamma sits at ``gamma_position`` inside the window (2/(1+alpha), rho),
    the midpoint by default. For alpha <= 1 the knob is c with c lambda^2 < 1:
    k = floor(|log(c lambda^2)| / (c lambda^2)) and gamma = 1 - 1/log k.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if alpha > 1.0:
        lower = 2.0 / (1.0 + alpha)
        if not lower < knob < 1.0:
            raise DomainError(
                f"rho must lie in (2/(1+alpha), 1) = ({lower:.6g}, 1), got {knob}"
            )
        if not 0.0 < gamma_position < 1.0:
            raise DomainError(f"gamma position must lie in (0, 1), got {gamma_position}")
        gamma = lower + gamma_position * (knob - lower)
        k = max(math.floor(1.0 / (lam * lam * (1.0 - knob)) + 1e-9), 2)
        return FracParams(gamma, k, RecipeOrigin.ALPHA_GT_1)
    scale = knob * lam * lam
    if not 0.0 < scale < 1.0:
        raise DomainError(f"need 0 < c lambda^2 < 1, got {scale:.6g}")
    # gamma = 1 - 1/log k is only positive for k >= 3
    k = max(math.floor(abs(math.log(scale)) / scale), 3)
    return FracParams(1.0 - 1.0 / math.log(k), k, RecipeOrigin.ALPHA_LE_1)


@dataclass(frozen=True)
class DelocCertificate:
    """Outcome of the U <= 1 test with everything needed to recheck the arithmetic."""

    params: FracParams
    u_value: float
    a_upper: tuple[float, ...]
    verdict: Verdict
    confidence: float
    tail_bounds: tuple[float, ...] = ()
    n_samples: int = 0
    rng_seed: int = 0
    model: dict[str, Any] = field(default_factory=dict)

    @property
    def delocalized(self) -> bool:
        return self.verdict is Verdict.DELOCALIZED

    @property
    def per_moment_confidence(self) -> float:
        return 1.0 - (1.0 - self.confidence) / self.params.k

    def verify(self) -> bool:
        """Recompute U from the stored bounds and check it against the verdict."""
        if not self.a_upper and math.isinf(self.u_value):
            return self.verdict is Verdict.INCONCLUSIVE
        if len(self.a_upper) != self.params.k or len(self.tail_bounds) != self.params.k:
            return False
        total = math.fsum(a * b for a, b in zip(self.a_upper, self.tail_bounds))
        if math.isfinite(self.u_value) and not math.isclose(total, self.u_value, rel_tol=1e-12):
            return False
        expected = Verdict.DELOCALIZED if total <= 1.0 else Verdict.INCONCLUSIVE
        return expected is self.verdict

    def to_record(self) -> dict[str, Any]:
        return {
            "certificate": "delocalization",
            "verdict": self.verdict.value,
            "u_value": self.u_value,
            "confidence": self.confidence,
            "per_moment_confidence": self.per_moment_confidence,
            "params": self.params.to_dict(),
            "a_upper": list(self.a_upper),
            "tail_bounds": list(self.tail_bounds),
            "n_samples": self.n_samples,
            "rng_seed": self.rng_seed,
            "model": dict(self.model),
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "DelocCertificate":
        if record.get("certificate") != "delocalization":
            raise DomainError("record is not a delocalization certificate")
        return cls(
            params=FracParams.from_dict(record["params"]),
            u_value=float(record["u_value"]),
            a_upper=tuple(float(a) for a in record["a_upper"]),
            verdict=Verdict(record["verdict"]),
            confidence=float(record["confidence"]),
            tail_bounds=tuple(float(b) for b in record.get("tail_bounds", ())),
            n_samples=int(record.get("n_samples", 0)),
            rng_seed=int(record.get("rng_seed", 0)),
            model=dict(record.get("model", {})),
        )


def delocalization_certificate(
    model: ModelSpec,
    params: FracParams,
    n_samples: int,
    confidence: float = DEFAULT_CONFIDENCE,
    rng_seed: int = 0,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    exact_horizon: int | None = None,
) -> DelocCertificate:
    """Delocalized iff U = sum_{i<k} A_i^+ b_tail_upper(k - i) <= 1.

    Below h^(gamma)(lambda) the tail sums diverge and the certificate is
    Inconclusive with U = inf.

    Raises:
        DomainError: At lambda = 0, where there is no coupling to certify.
        PreconditionError: If (1 + alpha) gamma <= 1.
    """
    if model.lam == 0:
        raise DomainError("delocalization certificate needs lambda > 0")
    params.validate(model.alpha)
    k, gamma = params.k, params.gamma
    if annealed_exponent(model.disorder, model.lam, model.h, m=gamma) > 0:
        LOGGER.info(
            "h=%g is below h^(%g)(%g); tail sums diverge, certificate inconclusive",
            model.h,
            gamma,
            model.lam,
        )
        return DelocCertificate(
            params=params,
            u_value=math.inf,
            a_upper=(),
            verdict=Verdict.INCONCLUSIVE,
            confidence=confidence,
            n_samples=n_samples,
            rng_seed=rng_seed,
            model=model.describe(),
        )

    metrics = get_metrics()
    metrics.start("delocalization_certificate")
    tails = tuple(b_tail_upper(model, gamma, k - i, exact_horizon) for i in range(k))
    per_moment = 1.0 - (1.0 - confidence) / k
    a_upper = fractional_moment_estimates(
        model, gamma, k, n_samples, per_moment, rng_seed, workers, chunk_size
    )
    u_value = math.fsum(float(a) * b for a, b in zip(a_upper, tails))
    verdict = Verdict.DELOCALIZED if u_value <= 1.0 else Verdict.INCONCLUSIVE
    event = metrics.stop("delocalization_certificate", k=str(k), samples=str(n_samples))
    if event is not None and event.exceeds_budget(DELOCALIZATION_BUDGET_S):
        LOGGER.warning(
            "Delocalization certificate took %.1fs (budget %.0fs)",
            event.duration_s,
            DELOCALIZATION_BUDGET_S,
        )
    LOGGER.info(
        "Delocalization lambda=%g h=%g gamma=%.4f k=%d: U=%.6g -> %s",
        model.lam,
        model.h,
        gamma,
        k,
        u_value,
        verdict.value,
    )
    return DelocCertificate(
        params=params,
        u_value=u_value,
        a_upper=tuple(float(a) for a in a_upper),
        verdict=verdict,
        confidence=confidence,
        tail_bounds=tails,
        n_samples=n_samples,
        rng_seed=rng_seed,
        model=model.describe(),
    )
