"""Tests for laboratory settings persistence."""

from pathlib import Path

import pytest

from coplab.settings import (
    DEFAULT_N_SCHEDULE,
    SETTINGS_ENV_VAR,
    LabSettings,
    default_metrics_log_path,
    default_settings_path,
    parse_key_values,
)


def test_defaults():
    """Test the documented defaults."""
    settings = LabSettings()
    assert settings.n_max == 2**20
    assert settings.n_schedule == DEFAULT_N_SCHEDULE
    assert settings.n_samples == 2000
    assert settings.confidence == 0.99


def test_save_and_load_round_trip(tmp_path: Path):
    """Test that saved settings load back unchanged."""
    path = tmp_path / "settings.conf"
    settings = LabSettings(n_samples=500, n_schedule=(32, 64), telemetry_enabled=True)

    settings.save(path)
    loaded = LabSettings.load(path)

    assert loaded == settings
    assert "n_schedule=32,64" in path.read_text(encoding="utf-8")


def test_load_missing_file_gives_defaults(tmp_path: Path):
    """Test falling back to defaults when no file exists."""
    assert LabSettings.load(tmp_path / "absent.conf") == LabSettings()


def test_load_malformed_file_gives_defaults(tmp_path: Path):
    """Test that an unreadable file is ignored."""
    path = tmp_path / "settings.conf"
    path.write_text("this line has no separator\n", encoding="utf-8")
    assert LabSettings.load(path) == LabSettings()


def test_from_dict_coerces_text_values():
    """Test coercion of key=value text, including powers of two."""
    settings = LabSettings.from_dict(
        {
            "n_max": "2**16",
            "confidence": "0.95",
            "n_schedule": "8, 16,32",
            "telemetry_enabled": "yes",
            "unknown_key": "ignored",
        }
    )
    assert settings.n_max == 65536
    assert settings.confidence == 0.95
    assert settings.n_schedule == (8, 16, 32)
    assert settings.telemetry_enabled is True


def test_merged_applies_only_given_overrides():
    """Test that None overrides leave file values in place."""
    base = LabSettings(n_samples=100)
    merged = base.merged(n_samples=None, confidence=0.9, workers="4")

    assert merged.n_samples == 100
    assert merged.confidence == 0.9
    assert merged.workers == 4
    assert base.merged() is base
    with pytest.raises(TypeError):
        base.merged(bogus=1)


def test_parse_key_values():
    """Test comment and blank-line handling."""
    text = "# comment\n\nn_samples = 10\nlog_file=a=b\n"
    assert parse_key_values(text) == {"n_samples": "10", "log_file": "a=b"}
    with pytest.raises(ValueError):
        parse_key_values("missing")


def test_settings_path_override(monkeypatch, tmp_path: Path):
    """Test that the environment variable relocates the settings file."""
    target = tmp_path / "custom.conf"
    monkeypatch.setenv(SETTINGS_ENV_VAR, str(target))

    assert default_settings_path() == target
    assert default_metrics_log_path() == tmp_path / "metrics.log"
