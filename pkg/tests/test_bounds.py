"""Tests for the deterministic bound formulas and their optimization."""

import math

import numpy as np
import pytest

from coplab.bounds import (
    QuadratureSpec,
    ThresholdKind,
    alpha_threshold,
    bound_curves,
    closed_form_quasiexpl,
    hermite_rule,
    jensen_excursion_lower_bound,
    kappa_grid,
    log_cosh_excess,
    neutral_stretch_hc_lower,
    optimize_kappa,
    quasiexpl_closed_lower,
    quasiexpl_value,
    slope_lower_bound,
    weak_coupling_slope_report,
)
from coplab.model import DisorderKind, DisorderLaw, DomainError, ReturnLaw
from coplab.stats import MCEstimate

GAUSSIAN = DisorderLaw(DisorderKind.GAUSSIAN)
RADEMACHER = DisorderLaw(DisorderKind.RADEMACHER)


def test_quadrature_spec_validation():
    """Test the limits on quadrature settings."""
    with pytest.raises(DomainError):
        QuadratureSpec(hermite_order=16)
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=1e-6)
    with pytest.raises(DomainError):
        QuadratureSpec(t_split=0.0)
    refined = QuadratureSpec().refined()
    assert refined.hermite_order == 192
    assert refined.rel_tol == 5e-10


def test_hermite_rule_is_standard_normal():
    """Test that the scaled rule integrates the first Gaussian moments."""
    nodes, weights = hermite_rule(96)
    assert weights.sum() == pytest.approx(1.0, abs=1e-13)
    assert np.dot(weights, nodes) == pytest.approx(0.0, abs=1e-13)
    assert np.dot(weights, nodes**2) == pytest.approx(1.0, abs=1e-12)
    assert np.dot(weights, nodes**4) == pytest.approx(3.0, abs=1e-10)


def test_log_cosh_excess():
    """Test the sign, small-s behavior and branch continuity of the excess."""
    assert log_cosh_excess(0.0) == 0.0
    for s in (1e-3, 0.5, 3.0, 10.0, 400.0):
        assert log_cosh_excess(s) <= 0.0
    assert log_cosh_excess(1e-3) == pytest.approx(-(1e-3**2) / 4.0, rel=1e-2)
    assert log_cosh_excess(4.0) == pytest.approx(log_cosh_excess(4.0 + 1e-9), abs=1e-6)


def test_closed_form_examples():
    """Test the closed-form minorant at its documented points."""
    expected = 0.5 - 0.19 / 1.8 - 0.45 * 0.19 / 0.81
    assert quasiexpl_closed_lower(0.81, 0.45) == pytest.approx(expected)
    assert quasiexpl_closed_lower(0.81, 0.45) == pytest.approx(0.288889, abs=1e-6)
    assert closed_form_quasiexpl(0.5) == pytest.approx(0.5 - 0.5 / math.sqrt(0.5))
    assert closed_form_quasiexpl(0.5) == pytest.approx(-0.2071, abs=1e-4)
    for alpha in (0.2, 0.6, 0.9):
        expected = 0.5 - (1.0 - alpha) / math.sqrt(alpha)
        assert closed_form_quasiexpl(alpha) == pytest.approx(expected, rel=1e-12)


def test_domain_errors():
    """Test that alpha outside (0, 1) and nonpositive kappa are rejected."""
    with pytest.raises(DomainError):
        quasiexpl_value(1.0, 0.5)
    with pytest.raises(DomainError):
        quasiexpl_value(0.5, 0.0)
    with pytest.raises(DomainError):
        quasiexpl_closed_lower(0.0, 1.0)
    with pytest.raises(DomainError):
        optimize_kappa(1.2)


def test_quadrature_dominates_closed_form():
    """Test A(alpha, kappa) >= its closed-form minorant on a coarse grid."""
    for alpha in np.linspace(0.05, 0.95, 5):
        for kappa in np.geomspace(0.05, 5.0, 5):
            a = quasiexpl_value(float(alpha), float(kappa))
            assert a >= quasiexpl_closed_lower(float(alpha), float(kappa)) - 1e-6
            assert a <= 0.5


def test_quadrature_near_alpha_one():
    """Test that A tends to 1/2 as alpha -> 1."""
    assert quasiexpl_value(0.999, 0.5) == pytest.approx(0.5, abs=0.005)


def test_quadrature_converges_under_refinement():
    """Test stability under doubled nodes and halved tolerance."""
    base = QuadratureSpec()
    for alpha, kappa in ((0.5, 0.3), (0.7, 1.0)):
        coarse = quasiexpl_value(alpha, kappa, base)
        fine = quasiexpl_value(alpha, kappa, base.refined())
        assert abs(coarse - fine) <= 1e-7


def test_quadrature_continuous_in_kappa():
    """Test that neighbouring kappa values give neighbouring A values."""
    kappas = np.linspace(0.2, 0.4, 21)
    values = np.array([quasiexpl_value(0.6, float(k)) for k in kappas])
    assert np.max(np.abs(np.diff(values))) < 0.05


def test_optimize_kappa_at_one_half():
    """Test the optimized A at alpha = 1/2."""
    kappa_star, a_star = optimize_kappa(0.5)
    assert 1e-3 <= kappa_star <= 10.0
    assert 0.227 < a_star < 1.0 / 3.0


def test_optimize_kappa_dominates_grid_and_minorant():
    """Test that the optimum beats every grid point and the closed form."""
    for alpha in (0.3, 0.9):
        _, a_star = optimize_kappa(alpha)
        grid_best = max(quasiexpl_value(alpha, float(k)) for k in kappa_grid())
        assert a_star >= grid_best
        assert a_star >= closed_form_quasiexpl(alpha)
    assert optimize_kappa(0.9)[1] >= 0.3945


def test_closed_form_threshold():
    """Test the explicit root of 2(1 + alpha) A(alpha) = 1 with the minorant."""
    assert alpha_threshold(ThresholdKind.CLOSED_FORM) == pytest.approx(0.800981, abs=1e-5)
    assert alpha_threshold("closed_form") == pytest.approx(0.800981, abs=1e-5)


@pytest.mark.slow
def test_quadrature_threshold():
    """Test that the optimized quadrature lowers the threshold into (0.60, 0.65)."""
    root = alpha_threshold(ThresholdKind.QUADRATURE)
    assert 0.60 < root < 0.65
    assert root < alpha_threshold(ThresholdKind.CLOSED_FORM)


@pytest.mark.slow
def test_quadrature_dominates_closed_form_full_grid():
    """Test minorant dominance on the full 20 x 20 grid."""
    for alpha in np.linspace(0.05, 0.95, 20):
        for kappa in np.linspace(0.05, 5.0, 20):
            a = quasiexpl_value(float(alpha), float(kappa))
            assert a >= quasiexpl_closed_lower(float(alpha), float(kappa)) - 1e-6


def test_slope_lower_bound_values():
    """Test the slope bound at alpha = 1/2, 1 and 3."""
    assert slope_lower_bound(0.5) == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert slope_lower_bound(1.0) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)
    assert slope_lower_bound(3.0) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(DomainError):
        slope_lower_bound(0.0)


def test_slope_improves_above_threshold():
    """Test that the bound beats 1/(1 + alpha) strictly for alpha >= 0.801."""
    for alpha in (0.81, 0.9, 0.99, 1.0, 2.0, 5.0):
        assert slope_lower_bound(alpha) > 1.0 / (1.0 + alpha)
        assert slope_lower_bound(alpha) <= 1.0


def test_neutral_stretch_lower_bound():
    """Test the finite-coupling bound from an F(lambda, 0) estimate."""
    assert neutral_stretch_hc_lower(1.0, MCEstimate.exact(0.5)) == pytest.approx(math.sqrt(0.5))
    assert neutral_stretch_hc_lower(0.5, MCEstimate.exact(0.227)) == pytest.approx(0.5502, abs=1e-4)
    assert neutral_stretch_hc_lower(1.0, MCEstimate.exact(0.0)) == 0.0
    assert neutral_stretch_hc_lower(1.0, MCEstimate(0.01, 0.1, 100)) == 0.0


def test_bound_curves_gaussian():
    """Test the assembled bounds for Gaussian charges."""
    curves = bound_curves(ReturnLaw.srw(64), GAUSSIAN, 1.0, MCEstimate.exact(0.3))

    assert curves.h_lower_old == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert curves.h_upper == pytest.approx(1.0, rel=1e-12)
    assert curves.h_lower_neutral == pytest.approx(math.sqrt(0.4))
    assert curves.slope_lower == pytest.approx(2.0 / 3.0)
    assert curves.h_lower_old <= curves.h_upper
    assert curves.to_dict()["slope_upper"] == 1.0


def test_bound_curves_rademacher():
    """Test Rademacher curves and the skipped neutral-stretch value."""
    curves = bound_curves(ReturnLaw.zipf(1.0, 64), RADEMACHER, 1.0, MCEstimate.exact(0.3))

    assert curves.h_upper == pytest.approx(0.5 * math.log(math.cosh(2.0)), rel=1e-12)
    assert curves.h_lower_neutral is None
    assert curves.h_lower_old <= curves.h_upper
    with pytest.raises(DomainError):
        bound_curves(ReturnLaw.zipf(1.0, 64), RADEMACHER, 0.0)


def test_weak_coupling_slope_report():
    """Test the slope table row above and below alpha = 1."""
    row = weak_coupling_slope_report(2.0)
    assert row["quadrature_A"] is None
    assert row["slope_lower"] == pytest.approx(1.0 / math.sqrt(3.0))

    row = weak_coupling_slope_report(0.9)
    assert row["quadrature_A"] >= row["closed_form_A"]
    assert row["kappa_star"] > 0


def test_jensen_excursion_bound():
    """Test the excursion Jensen bound for alpha > 1."""
    law = ReturnLaw.zipf(2.0, 4096)
    for disorder in (GAUSSIAN, RADEMACHER):
        at_zero = jensen_excursion_lower_bound(law, disorder, 1.0, 0.0, truncation=200)
        assert 0.0 < at_zero <= 2.0
        far = jensen_excursion_lower_bound(law, disorder, 1.0, 5.0, truncation=200)
        assert far == 0.0
    with pytest.raises(DomainError):
        jensen_excursion_lower_bound(ReturnLaw.srw(64), GAUSSIAN, 1.0, 0.0)
