"""Tests for critical-curve brackets, scans, experiments and their output files."""

import json
from pathlib import Path

import numpy as np
import pytest

from coplab.bounds import bound_curves
from coplab.model import (
    DisorderKind,
    DisorderLaw,
    DomainError,
    ModelSpec,
    ReturnLaw,
    UnsupportedModelError,
)
from coplab.partition import Verdict
from coplab.partition.dp import extend_log_profiles
from coplab.partition.sample import draw_prefix_batch
from coplab.phase import (
    CSV_HEADER,
    ExperimentConfig,
    ExperimentKind,
    HeavyHeadEntry,
    HeavyHeadReport,
    LdpMethod,
    LdpRateResult,
    ProbeRecord,
    ScanRow,
    SearchBudget,
    dumps,
    experiment_heavy_head,
    experiment_ldp_rate,
    hc_bracket,
    run_experiment,
    scan_csv_text,
    scan_phase,
    write_json,
    write_records,
    write_scan_csv,
)
from coplab.phase.experiments import LDP_PILOT_SAMPLES, ldp_tilt
from coplab.phase.scan import (
    FLAG_BUDGET,
    FLAG_EXCLUSION,
    FLAG_INVERTED,
    FLAG_MONOTONICITY,
    FLAG_UNRESOLVED,
)
from coplab.phase.serialization import format_float, probe_filename
from coplab.settings import LabSettings
from coplab.stats import MCEstimate

GAUSSIAN = DisorderLaw(DisorderKind.GAUSSIAN)
RADEMACHER = DisorderLaw(DisorderKind.RADEMACHER)
KNOWN_FLAGS = {FLAG_BUDGET, FLAG_EXCLUSION, FLAG_INVERTED, FLAG_MONOTONICITY, FLAG_UNRESOLVED}

TINY_BUDGET = SearchBudget(
    n_schedule=(16, 32),
    n_samples=40,
    moment_samples=200,
    tolerance=0.25,
    max_probes=2,
    max_k=32,
    wall_budget_s=120.0,
)


def _row(lam: float, h_loc_max, h_deloc_min, probes=()) -> ScanRow:
    curves = bound_curves(ReturnLaw.srw(64), GAUSSIAN, lam)
    return ScanRow(lam, h_loc_max, h_deloc_min, curves, probes=tuple(probes))


def test_format_float():
    """Test round-trippable float text and empty missing values."""
    assert format_float(None) == ""
    assert format_float(0.5) == "0.5"
    assert float(format_float(0.1)) == 0.1


def test_empty_scan_csv_is_header_only():
    """Test the CSV text of an empty grid."""
    assert scan_csv_text([]) == ",".join(CSV_HEADER) + "\n"


def test_scan_csv_rows(tmp_path: Path):
    """Test column order, missing values and deterministic text."""
    rows = [_row(0.5, 0.25, None), _row(1.0, None, 1.0)]
    text = write_scan_csv(rows, tmp_path / "out" / "scan.csv")

    lines = text.splitlines()
    assert lines[0].split(",") == list(CSV_HEADER)
    first = lines[1].split(",")
    assert first[0] == "0.5"
    assert first[1] == "0.25"
    assert first[2] == ""
    assert float(first[4]) == pytest.approx(0.5)
    assert (tmp_path / "out" / "scan.csv").read_text(encoding="utf-8") == text
    assert scan_csv_text(rows) == text


def test_dumps_handles_numpy_enums_and_infinities():
    """Test JSON conversion of non-finite floats, numpy scalars and enums."""
    payload = {
        "u": float("inf"),
        "x": np.float64(1.5),
        "v": Verdict.LOCALIZED,
        "a": np.arange(3),
        "t": (1, 2),
    }
    loaded = json.loads(dumps(payload))
    assert loaded == {"u": "inf", "x": 1.5, "v": "Localized", "a": [0, 1, 2], "t": [1, 2]}


def test_write_json(tmp_path: Path):
    """Test that write_json writes the returned text."""
    path = tmp_path / "nested" / "report.json"
    text = write_json({"b": 1, "a": 2}, path)
    assert path.read_text(encoding="utf-8") == text
    assert text.index('"a"') < text.index('"b"')


def test_write_records_groups_probes(tmp_path: Path):
    """Test one file per probed point holding all of its certificates."""
    probes = [
        ProbeRecord(1.0, 0.5, "localization", Verdict.UNDECIDED, {"n_used": 32}),
        ProbeRecord(1.0, 0.5, "delocalization", Verdict.DELOCALIZED, {"u": 0.4}),
        ProbeRecord(1.0, 0.25, "localization", Verdict.LOCALIZED, {}),
    ]
    written = write_records([_row(1.0, 0.25, 0.5, probes)], tmp_path)

    assert sorted(path.name for path in written) == [
        probe_filename(1.0, 0.25),
        probe_filename(1.0, 0.5),
    ]
    assert probe_filename(1.0, 0.5) == "probe_1_0.5.json"
    data = json.loads((tmp_path / probe_filename(1.0, 0.5)).read_text(encoding="utf-8"))
    assert [record["kind"] for record in data["probes"]] == ["localization", "delocalization"]
    assert data["probes"][1]["verdict"] == "Delocalized"


def test_scan_row_flags():
    """Test bracket consistency and idempotent flags."""
    row = _row(1.0, 0.7, 0.6)
    assert not row.bracket_consistent()
    flagged = row.with_flag(FLAG_INVERTED)
    assert flagged.with_flag(FLAG_INVERTED) is flagged
    assert flagged.to_record()["flags"] == [FLAG_INVERTED]
    assert _row(1.0, None, 0.6).bracket_consistent()


def test_search_budget_validation():
    """Test rejected budgets and settings-derived budgets."""
    with pytest.raises(DomainError):
        SearchBudget(n_schedule=())
    with pytest.raises(DomainError):
        SearchBudget(tolerance=0.0)
    with pytest.raises(DomainError):
        SearchBudget(budget_split=1.5)

    budget = SearchBudget.from_settings(LabSettings(n_samples=77), n_samples=None, max_k=8)
    assert budget.n_samples == 77
    assert budget.max_k == 8
    assert SearchBudget.from_settings(LabSettings(), n_samples=5).n_samples == 5


def test_recipe_grid():
    """Test the recipe knobs and the k ceiling."""
    full = SearchBudget().recipe_grid(2.0, 1.0)
    assert [params.k for params in full] == [5, 10, 20]

    capped = SearchBudget(max_k=8).recipe_grid(2.0, 1.0)
    assert [params.k for params in capped] == [5]

    for params in SearchBudget(max_k=30).recipe_grid(0.5, 1.0):
        assert params.k <= 30


def test_hc_bracket_small_budget():
    """Test the bracket invariants on a cheap search."""
    model = ModelSpec.build(ReturnLaw.zipf(2.0, 4096), GAUSSIAN, 1.0, 0.0)
    row = hc_bracket(model, 1.0, TINY_BUDGET, rng_seed=3)

    assert row.lam == 1.0
    assert set(row.flags) <= KNOWN_FLAGS
    assert row.budgets["localization_probes"] >= 1
    assert row.budgets["n_samples"] == 40
    if row.h_loc_max is not None:
        assert 0.0 <= row.h_loc_max <= 1.05 * row.bounds.h_upper
    if row.h_deloc_min is not None:
        assert row.h_deloc_min <= 1.05 * row.bounds.h_upper * (1.0 + 1e-12)
    if row.h_loc_max is None or row.h_deloc_min is None:
        assert FLAG_UNRESOLVED in row.flags
    if not row.bracket_consistent():
        assert FLAG_INVERTED in row.flags
    assert all(probe.lam == 1.0 for probe in row.probes)

    again = hc_bracket(model, 1.0, TINY_BUDGET, rng_seed=3)
    assert (again.h_loc_max, again.h_deloc_min) == (row.h_loc_max, row.h_deloc_min)
    with pytest.raises(DomainError):
        hc_bracket(model, 0.0, TINY_BUDGET)


def test_scan_phase_writes_outputs(tmp_path: Path):
    """Test a two-point scan with CSV and probe-record output."""
    model = ModelSpec.build(ReturnLaw.zipf(2.0, 4096), GAUSSIAN, 1.0, 0.0)
    rows = scan_phase(
        model,
        [0.5, 1.0],
        TINY_BUDGET,
        rng_seed=1,
        out=tmp_path / "scan.csv",
        records_dir=tmp_path / "probes",
    )

    assert [row.lam for row in rows] == [0.5, 1.0]
    lines = (tmp_path / "scan.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert list((tmp_path / "probes").glob("probe_*.json"))
    with pytest.raises(DomainError):
        scan_phase(model, [1.0, 0.5], TINY_BUDGET)


def test_experiment_config_validation():
    """Test required parameters per experiment kind."""
    with pytest.raises(DomainError):
        ExperimentConfig("ldp_rate", {"lambda": 1.0}, 0)
    config = ExperimentConfig(
        "heavy_head",
        {"alpha": 0.5, "lambda": 1.0, "epsilon": 0.1, "head_schedule": [4]},
        seed=1,
    )
    assert config.kind is ExperimentKind.HEAVY_HEAD
    assert config.get("h_step", 0.05) == 0.05


def test_ldp_rate_errors():
    """Test unsupported charges and parameter ranges."""
    law = ReturnLaw.zipf(2.0, 256)
    with pytest.raises(UnsupportedModelError):
        experiment_ldp_rate(law, 1.0, 0.3, 10, 0.5, 20, seed=0, disorder=RADEMACHER)
    with pytest.raises(DomainError):
        experiment_ldp_rate(law, 1.0, 0.3, 0, 0.5, 20, seed=0)
    with pytest.raises(DomainError):
        experiment_ldp_rate(law, 1.0, 0.3, 10, 1.0, 20, seed=0)


def test_ldp_rate_result():
    """Test the result fields for a fixed reference free energy."""
    law = ReturnLaw.zipf(2.0, 256)
    result = experiment_ldp_rate(
        law, 1.0, 0.3, 10, 0.5, 300, seed=2, f_ref=MCEstimate.exact(-0.4)
    )

    assert result.threshold == pytest.approx(-0.2)
    assert result.target == pytest.approx(0.045)
    assert result.rate_est >= 0.0
    assert result.method is LdpMethod.IMPORTANCE
    record = result.to_record()
    assert record["experiment"] == "ldp_rate"
    assert record["ell"] == 10
    assert 0.0 <= record["tilt"] <= 0.3
    assert record["rate_stderr"] == result.rate_stderr

    direct = experiment_ldp_rate(
        law, 1.0, 0.3, 10, 0.5, 300, seed=2, f_ref=MCEstimate.exact(-0.4), method="direct"
    )
    assert direct.method is LdpMethod.DIRECT
    assert direct.tilt == 0.0
    assert 0.0 <= direct.p_hat.mean <= 1.0


def test_ldp_tilt_reaches_the_threshold():
    """Test the shift that makes the stretch event typical on the pilot batch."""
    model = ModelSpec.build(ReturnLaw.zipf(2.0, 256), GAUSSIAN, 1.0, 0.0)
    ell, h, seed = 20, 0.3, 11
    prefix = draw_prefix_batch(GAUSSIAN, ell, seed, range(LDP_PILOT_SAMPLES))

    def pilot_mean(t: float) -> float:
        log_z = extend_log_profiles(model.with_h(h - t), prefix, None, ell)[:, ell]
        return float(np.mean(log_z)) / ell

    assert ldp_tilt(model, h, ell, pilot_mean(0.15), seed) == pytest.approx(0.15, abs=2e-3)
    assert ldp_tilt(model, h, ell, pilot_mean(0.0) - 1.0, seed) == 0.0
    assert ldp_tilt(model, h, ell, pilot_mean(h) + 1.0, seed) == h
    assert ldp_tilt(model, 0.0, ell, 5.0, seed) == 0.0


def test_ldp_rate_stderr():
    """Test the delta-method error of the rate and its empty-event value."""
    base = dict(
        target=0.045,
        f_ref=MCEstimate.exact(0.3),
        threshold=0.21,
        free_energy_bound=0.0,
        method=LdpMethod.IMPORTANCE,
        ell=100,
    )
    p_hat = MCEstimate(mean=1e-3, stderr=2e-4, n_samples=1000)
    result = LdpRateResult(rate_est=0.069, p_hat=p_hat, **base)
    assert result.rate_stderr == pytest.approx(0.002)

    empty = MCEstimate(mean=0.0, stderr=0.0, n_samples=1000)
    assert LdpRateResult(rate_est=float("inf"), p_hat=empty, **base).rate_stderr == float("inf")


def test_heavy_head_small_run():
    """Test the report structure on a cheap heavy-head sweep."""
    budget = SearchBudget(n_schedule=(16,), n_samples=20)
    report = experiment_heavy_head(
        0.5, 1.0, 0.5, [4, 16], budget, seed=1, h_step=0.5, n_max=256
    )

    assert report.h_target == pytest.approx(0.5)
    assert [entry.head_size for entry in report.entries] == [4, 16]
    assert report.baseline.head_size is None
    assert report.smallest_certifying_head in (None, 4, 16)
    assert isinstance(report.monotone(), bool)
    record = report.to_record()
    assert record["experiment"] == "heavy_head"
    assert len(record["entries"]) == 2
    with pytest.raises(DomainError):
        experiment_heavy_head(0.5, 1.0, 2.0, [4], budget, n_max=256)


def test_heavy_head_monotone_allows_one_step():
    """Test the one-grid-step slack of the head-size monotonicity check."""

    def report(levels):
        entries = tuple(
            HeavyHeadEntry(2**k, False, 64, MCEstimate.exact(0.0), level)
            for k, level in zip((4, 8, 12), levels, strict=True)
        )
        return HeavyHeadReport(0.5, 1.0, 0.8, 0.05, entries, entries[0])

    assert report([0.60, 0.55, 0.55]).monotone()
    assert report([None, 0.1, 0.3]).monotone()
    assert not report([0.60, 0.50, 0.65]).monotone()
    assert not report([0.3, None, 0.3]).monotone()


def test_run_experiment_dispatch():
    """Test that a config runs the matching experiment."""
    config = ExperimentConfig(
        ExperimentKind.HEAVY_HEAD,
        {
            "alpha": 0.5,
            "lambda": 1.0,
            "epsilon": 0.5,
            "head_schedule": [4],
            "n_max": 256,
            "h_step": 0.5,
        },
        seed=0,
    )
    record = run_experiment(config, budget=SearchBudget(n_schedule=(16,), n_samples=10))
    assert record["experiment"] == "heavy_head"
    assert record["alpha"] == 0.5


@pytest.mark.slow
def test_ldp_importance_agrees_with_direct():
    """Test both estimators of the stretch probability against each other."""
    law = ReturnLaw.zipf(2.0, 256)
    f_ref = MCEstimate.exact(-0.4)
    importance = experiment_ldp_rate(law, 1.0, 0.3, 10, 0.5, 20000, seed=5, f_ref=f_ref)
    direct = experiment_ldp_rate(
        law, 1.0, 0.3, 10, 0.5, 20000, seed=5, f_ref=f_ref, method=LdpMethod.DIRECT
    )
    spread = np.hypot(importance.p_hat.stderr, direct.p_hat.stderr)
    assert abs(importance.p_hat.mean - direct.p_hat.mean) <= 4.0 * spread + 1e-3


@pytest.mark.slow
def test_scan_brackets_are_monotone_at_acceptance_scale(tmp_path: Path):
    """Test a default-budget scan at alpha = 1/2 for inverted brackets."""
    model = ModelSpec.build(ReturnLaw.zipf(0.5, 2**16), GAUSSIAN, 1.0, 0.0)
    budget = SearchBudget(n_schedule=(256, 1024, 4096), n_samples=400, workers=4)
    rows = scan_phase(model, [0.5, 1.0], budget, rng_seed=7, out=tmp_path / "scan.csv")
    for row in rows:
        assert FLAG_INVERTED not in row.flags
        assert FLAG_EXCLUSION not in row.flags


@pytest.mark.slow
def test_ldp_rate_at_acceptance_scale():
    """Test the neutral-stretch rate at lambda = 1, h = 0.3, delta = 0.3, ell = 400."""
    law = ReturnLaw.srw(2**12)
    result = experiment_ldp_rate(law, 1.0, 0.3, 400, 0.3, 2000, seed=1)

    assert 0.0 < result.tilt <= 0.3
    assert 0.0 < result.rate_est <= 1.2 * result.target
    assert result.rate_stderr <= 0.25 * result.rate_est

    neutral = experiment_ldp_rate(law, 1.0, 0.0, 400, 0.3, 2000, seed=1)
    assert neutral.tilt == 0.0
    assert neutral.rate_est <= 0.01


@pytest.mark.slow
def test_heavy_head_certifiable_h_grows_with_head():
    """Test max certifiable h over heads 2^4, 2^8, 2^12 at lambda = 1, alpha = 1/2."""
    budget = SearchBudget(n_schedule=(64, 256, 1024), n_samples=200, workers=4)
    report = experiment_heavy_head(
        0.5, 1.0, 0.2, [2**4, 2**8, 2**12], budget, seed=1, h_step=0.05, n_max=2**14
    )

    assert [entry.head_size for entry in report.entries] == [16, 256, 4096]
    assert report.monotone()
