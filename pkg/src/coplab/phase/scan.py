"""Critical-curve brackets by bisection between the two certificates."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence

from ..bounds.curves import BoundCurves, bound_curves
from ..bounds.quadrature import DEFAULT_QUADRATURE, QuadratureSpec
from ..fracmom.certificate import FracParams, delocalization_certificate, parameter_recipe
from ..metrics import WallBudget
from ..model.exceptions import DomainError, HorizonError, PreconditionError
from ..model.spec import ModelSpec
from ..partition.estimate import Verdict, localization_certificate
from ..settings import DEFAULT_N_SCHEDULE, LabSettings
from ..stats import MCEstimate, derive_seed
from .serialization import write_records, write_scan_csv

LOGGER = logging.getLogger(__name__)

BRACKET_STRETCH = 1.05
ALPHA_GT_1_KNOBS = (0.8, 0.9, 0.95)
ALPHA_LE_1_KNOBS = (0.05, 0.1, 0.2, 0.5)

FLAG_MONOTONICITY = "monotonicity_violation"
FLAG_EXCLUSION = "exclusion_violation"
FLAG_INVERTED = "bracket_inverted"
FLAG_BUDGET = "budget_exhausted"
FLAG_UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class SearchBudget:
    """Sample, schedule, grid and wall-clock limits of one bracket search."""

    n_schedule: tuple[int, ...] = DEFAULT_N_SCHEDULE
    n_samples: int = 2000
    moment_samples: int = 10_000
    confidence: float = 0.99
    recipe_knobs: tuple[float, ...] | None = None
    gamma_positions: tuple[float, ...] = (0.5,)
    max_k: int = 4096
    tolerance: float = 0.01
    wall_budget_s: float = 600.0
    budget_split: float = 0.5
    max_probes: int = 16
    exact_horizon: int = 2**16
    workers: int = 1
    chunk_size: int = 64

    def __post_init__(self) -> None:
        if not self.n_schedule:
            raise DomainError("empty N schedule")
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be positive, got {self.tolerance}")
        if not 0.0 <= self.budget_split <= 1.0:
            raise DomainError(f"budget split must lie in [0, 1], got {self.budget_split}")

    @classmethod
    def from_settings(cls, settings: LabSettings, **overrides: Any) -> "SearchBudget":
        base = cls(
            n_schedule=tuple(settings.n_schedule),
            n_samples=settings.n_samples,
            confidence=settings.confidence,
            tolerance=settings.bracket_tolerance,
            wall_budget_s=settings.probe_wall_budget_s,
            budget_split=settings.budget_split,
            exact_horizon=settings.exact_tail_horizon,
            workers=settings.workers,
            chunk_size=settings.chunk_size,
        )
        applied = {key: value for key, value in overrides.items() if value is not None}
        return replace(base, **applied) if applied else base

    def recipe_grid(self, alpha: float, lam: float) -> list[FracParams]:
        """Every (gamma, k) the delocalization search tries, skipping empty windows."""
        knobs = self.recipe_knobs
        if knobs is None:
            knobs = ALPHA_GT_1_KNOBS if alpha > 1.0 else ALPHA_LE_1_KNOBS
        positions = self.gamma_positions if alpha > 1.0 else (0.5,)
        grid: list[FracParams] = []
        for knob in knobs:
            for position in positions:
                try:
                    params = parameter_recipe(alpha, lam, knob, position)
                except DomainError as exc:
                    LOGGER.debug("Recipe knob %g skipped: %s", knob, exc)
                    continue
                if params.k > self.max_k:
                    LOGGER.debug(
                        "Recipe knob %g gives k=%d > %d; skipped", knob, params.k, self.max_k
                    )
                    continue
                if params not in grid:
                    grid.append(params)
        return grid

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ProbeRecord:
    """One certificate run at one (lambda, h)."""

    lam: float
    h: float
    kind: str
    verdict: Verdict
    record: dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "h": self.h,
            "kind": self.kind,
            "verdict": self.verdict.value,
            "record": self.record,
        }


@dataclass(frozen=True)
class ScanRow:
    """What was certified at one lambda.

    h_loc_max is the largest h certified Localized and h_deloc_min the
    smallest h certified Delocalized; either may be missing.
    """

    lam: float
    h_loc_max: float | None
    h_deloc_min: float | None
    bounds: BoundCurves
    budgets: dict[str, Any] = field(default_factory=dict)
    probes: tuple[ProbeRecord, ...] = field(default=(), repr=False)
    flags: tuple[str, ...] = ()

    def with_flag(self, flag: str) -> "ScanRow":
        if flag in self.flags:
            return self
        return replace(self, flags=(*self.flags, flag))

    def bracket_consistent(self) -> bool:
        if self.h_loc_max is None or self.h_deloc_min is None:
            return True
        return self.h_loc_max < self.h_deloc_min

    def to_record(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "h_loc_max": self.h_loc_max,
            "h_deloc_min": self.h_deloc_min,
            "bounds": self.bounds.to_dict(),
            "budgets": dict(self.budgets),
            "flags": list(self.flags),
            "probes": [probe.to_record() for probe in self.probes],
        }


class _ProbeLog:
    """Probe history of one bracket search, with the exclusion check."""

    def __init__(self) -> None:
        self.probes: list[ProbeRecord] = []
        self._verdicts: dict[float, set[Verdict]] = {}

    def add(self, probe: ProbeRecord) -> None:
        self.probes.append(probe)
        self._verdicts.setdefault(probe.h, set()).add(probe.verdict)

    def count(self, kind: str) -> int:
        return sum(1 for probe in self.probes if probe.kind == kind)

    def excluded(self) -> bool:
        """True unless some h was certified both Localized and Delocalized."""
        both = {Verdict.LOCALIZED, Verdict.DELOCALIZED}
        return not any(both <= verdicts for verdicts in self._verdicts.values())


def hc_bracket(
    model: ModelSpec,
    lam: float,
    budget: SearchBudget | None = None,
    rng_seed: int = 0,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    f_lambda0: MCEstimate | None = None,
) -> ScanRow:
    """Bracket h_c(lambda) between certified Localized and Delocalized points.

    Localization is bisected on [0, 1.05 h^(1)(lambda)] starting from h = 0;
    delocalization is bisected between the localization bracket and
    1.05 h^(1)(lambda), trying every recipe (gamma, k) at each probe. The
    wall budget is split between the two searches by ``budget.budget_split``.
    The h of ``model`` is ignored.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    budget = budget or SearchBudget()
    base = model.with_coupling(lam, 0.0)
    curves = bound_curves(base.return_law, base.disorder, lam, f_lambda0, quad)
    ceiling = BRACKET_STRETCH * curves.h_upper
    wall = WallBudget(budget.wall_budget_s)
    log = _ProbeLog()
    flags: list[str] = []

    loc_wall = wall.split(budget.budget_split)
    loc_seed = derive_seed(rng_seed, 1)

    def localized(h: float) -> bool:
        verdict = localization_certificate(
            base.with_h(h),
            budget.n_schedule,
            budget.n_samples,
            budget.confidence,
            loc_seed,
            budget.workers,
            budget.chunk_size,
            loc_wall,
        )
        log.add(ProbeRecord(lam, h, "localization", verdict.verdict, verdict.to_record()))
        return verdict.localized

    h_loc_max = None
    if localized(0.0):
        h_loc_max, _, exhausted = _bisect(
            localized, 0.0, ceiling, budget.tolerance, loc_wall, budget.max_probes
        )
        if exhausted:
            flags.append(FLAG_BUDGET)

    deloc_wall = WallBudget(wall.remaining())
    deloc_seed = derive_seed(rng_seed, 2)
    grid = budget.recipe_grid(base.alpha, lam)

    def delocalized(h: float) -> bool:
        for params in grid:
            if deloc_wall.exhausted():
                return False
            try:
                certificate = delocalization_certificate(
                    base.with_h(h),
                    params,
                    budget.moment_samples,
                    budget.confidence,
                    deloc_seed,
                    budget.workers,
                    budget.chunk_size,
                    budget.exact_horizon,
                )
            except (PreconditionError, HorizonError) as exc:
                LOGGER.debug("Delocalization probe h=%g %s not applicable: %s", h, params, exc)
                continue
            log.add(
                ProbeRecord(lam, h, "delocalization", certificate.verdict, certificate.to_record())
            )
            if certificate.delocalized:
                return True
        return False

    h_deloc_min = None
    floor = h_loc_max if h_loc_max is not None else 0.0
    if grid and delocalized(ceiling):
        # invariant: the lower end is never certified Delocalized
        _, h_deloc_min, exhausted = _bisect(
            lambda h: not delocalized(h),
            floor,
            ceiling,
            budget.tolerance,
            deloc_wall,
            budget.max_probes,
        )
        if exhausted and FLAG_BUDGET not in flags:
            flags.append(FLAG_BUDGET)

    if not log.excluded():
        flags.append(FLAG_EXCLUSION)
    row = ScanRow(
        lam=lam,
        h_loc_max=h_loc_max,
        h_deloc_min=h_deloc_min,
        bounds=curves,
        budgets={
            **budget.to_dict(),
            "elapsed_s": round(wall.elapsed(), 3),
            "localization_probes": log.count("localization"),
            "delocalization_probes": log.count("delocalization"),
        },
        probes=tuple(log.probes),
        flags=tuple(flags),
    )
    if not row.bracket_consistent():
        row = row.with_flag(FLAG_INVERTED)
    if h_loc_max is None or h_deloc_min is None:
        row = row.with_flag(FLAG_UNRESOLVED)
    LOGGER.info(
        "lambda=%g: h_loc_max=%s h_deloc_min=%s h^(1)=%.6g flags=%s",
        lam,
        h_loc_max,
        h_deloc_min,
        curves.h_upper,
        ",".join(row.flags) or "-",
    )
    return row


def _bisect(
    holds: Callable[[float], bool],
    lo: float,
    hi: float,
    tolerance: float,
    wall: WallBudget,
    max_probes: int,
) -> tuple[float, float, bool]:
    """Shrink [lo, hi] where ``holds(lo)`` is known true and ``holds(hi)`` false.

    Returns the final (lo, hi) and whether the budget ran out before the width
    dropped to ``tolerance``.
    """
    probes = 0
    while hi - lo > tolerance:
        if wall.exhausted() or probes >= max_probes:
            return lo, hi, True
        mid = 0.5 * (lo + hi)
        probes += 1
        if holds(mid):
            lo = mid
        else:
            hi = mid
        LOGGER.debug("Bisection step %d: [%g, %g]", probes, lo, hi)
    return lo, hi, False


def scan_phase(
    model: ModelSpec,
    lambda_grid: Sequence[float],
    budget: SearchBudget | None = None,
    rng_seed: int = 0,
    out: str | Path | None = None,
    records_dir: str | Path | None = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scan_workers: int = 1,
) -> list[ScanRow]:
    """One ScanRow per lambda, in grid order, with raw certified values.

    Rows whose h_loc_max falls below an earlier row's are flagged, not
    repaired. Each lambda gets its own seed derived from ``rng_seed`` and its
    grid position.
    """
    grid = [float(lam) for lam in lambda_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"lambda grid must be increasing, got {grid}")
    budget = budget or SearchBudget()

    def run(item: tuple[int, float]) -> ScanRow:
        index, lam = item
        return hc_bracket(model, lam, budget, derive_seed(rng_seed, index), quad)

    if scan_workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=scan_workers) as pool:
            rows = list(pool.map(run, enumerate(grid)))
    else:
        rows = [run(item) for item in enumerate(grid)]
    rows = list(_flag_monotonicity(rows))
    if out is not None:
        write_scan_csv(rows, out)
    if records_dir is not None:
        write_records(rows, records_dir)
    return rows


def _flag_monotonicity(rows: Sequence[ScanRow]) -> Iterator[ScanRow]:
    best: float | None = None
    for row in rows:
        if row.h_loc_max is not None:
            if best is not None and row.h_loc_max < best:
                LOGGER.warning(
                    "h_loc_max decreases at lambda=%g (%g < %g); budgets may be too small",
                    row.lam,
                    row.h_loc_max,
                    best,
                )
                row = row.with_flag(FLAG_MONOTONICITY)
            best = row.h_loc_max if best is None else max(best, row.h_loc_max)
        yield row
