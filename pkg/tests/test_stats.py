"""Tests for Monte Carlo estimates and deterministic sampling."""

import math

import numpy as np
import pytest

from coplab.model import DomainError
from coplab.stats import (
    MCEstimate,
    chunk_ranges,
    column_upper_bounds,
    derive_seed,
    one_sided_quantile,
    run_samples,
    sample_rng,
)


def test_estimate_from_samples():
    """Test mean and standard error of a small sample."""
    estimate = MCEstimate.from_samples([1.0, 2.0, 3.0, 4.0], confidence=0.95)

    assert estimate.mean == 2.5
    assert estimate.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert estimate.n_samples == 4
    assert estimate.lower() < estimate.mean < estimate.upper()
    assert estimate.upper() - estimate.mean == pytest.approx(1.6448536 * estimate.stderr)


def test_estimate_validation():
    """Test that invalid estimates are rejected."""
    with pytest.raises(DomainError):
        MCEstimate(0.0, 0.0, 1, confidence=1.0)
    with pytest.raises(DomainError):
        MCEstimate(0.0, -1.0, 1)
    with pytest.raises(DomainError):
        MCEstimate.from_samples([])


def test_exact_estimate_has_no_spread():
    """Test that an exact value has equal lower and upper bounds."""
    estimate = MCEstimate.exact(-0.25, n_samples=10)
    assert estimate.lower() == estimate.upper() == -0.25


def test_estimate_scaling_and_dict():
    """Test scaling by a negative factor and dictionary conversion."""
    estimate = MCEstimate(2.0, 0.5, 100, 0.99)
    scaled = estimate.scaled(-0.5)

    assert scaled.mean == -1.0
    assert scaled.stderr == 0.25
    assert MCEstimate.from_dict(estimate.to_dict()) == estimate


def test_one_sided_quantile():
    """Test the normal quantile used by the confidence bounds."""
    assert one_sided_quantile(0.5) == 0.0
    assert one_sided_quantile(0.99) == pytest.approx(2.3263479, rel=1e-7)
    with pytest.raises(DomainError):
        one_sided_quantile(0.0)


def test_column_upper_bounds():
    """Test per-column upper confidence bounds."""
    samples = np.array([[1.0, 0.0], [3.0, 0.0]])
    bounds = column_upper_bounds(samples, 0.5)
    assert np.allclose(bounds, [2.0, 0.0])

    single = column_upper_bounds(np.array([[4.0, 5.0]]), 0.99)
    assert np.allclose(single, [4.0, 5.0])


def test_sample_rng_depends_only_on_seed_and_index():
    """Test that per-sample streams are reproducible and distinct."""
    first = sample_rng(11, 3).standard_normal(4)
    again = sample_rng(11, 3).standard_normal(4)
    other = sample_rng(11, 4).standard_normal(4)

    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)


def test_derive_seed():
    """Test that derived seeds are deterministic and key-dependent."""
    assert derive_seed(5, 1) == derive_seed(5, 1)
    assert derive_seed(5, 1) != derive_seed(5, 2)
    assert derive_seed(5, 1) != derive_seed(6, 1)
    assert 0 <= derive_seed(5, 1, 2) < 2**32


def test_chunk_ranges():
    """Test that chunks cover every index once in order."""
    chunks = chunk_ranges(10, 4)
    assert [list(chunk) for chunk in chunks] == [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9]]
    with pytest.raises(DomainError):
        chunk_ranges(10, 0)


def test_run_samples_is_independent_of_workers():
    """Test bit-identical results for serial and threaded execution."""

    def draw(indices: range) -> np.ndarray:
        return np.array([sample_rng(42, i).standard_normal() for i in indices])

    serial = run_samples(draw, 257, workers=1, chunk_size=16)
    threaded = run_samples(draw, 257, workers=4, chunk_size=16)

    assert serial.shape == (257,)
    assert np.array_equal(serial, threaded)
    assert abs(serial.mean()) < 5.0 / math.sqrt(257)


def test_run_samples_requires_samples():
    """Test that an empty run is refused."""
    with pytest.raises(DomainError):
        run_samples(lambda indices: np.zeros(len(indices)), 0)
