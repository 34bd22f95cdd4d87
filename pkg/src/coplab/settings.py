"""Persistent laboratory settings and convenience helpers."""

from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

LOGGER = logging.getLogger(__name__)

SETTINGS_ENV_VAR = "COPLAB_SETTINGS_PATH"

DEFAULT_N_SCHEDULE = (64, 128, 256, 512, 1024, 2048, 4096)


@dataclass(frozen=True)
class LabSettings:
    """Numerical defaults, overridable from a key=value file and from CLI flags."""

    n_max: int = 2**20
    n_schedule: tuple[int, ...] = field(default=DEFAULT_N_SCHEDULE)
    n_samples: int = 2000
    confidence: float = 0.99
    # Quadrature for the weak-coupling bounds
    hermite_order: int = 96
    t_split: float = 1e-4
    rel_tol: float = 1e-9
    # Monte Carlo execution
    workers: int = 1
    chunk_size: int = 64
    # Fractional-moment tail sums
    exact_tail_horizon: int = 2**16
    # Phase scans
    probe_wall_budget_s: float = 600.0
    budget_split: float = 0.5
    bracket_tolerance: float = 0.01
    log_file: str = ""
    telemetry_enabled: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the settings to a dictionary."""
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "LabSettings":
        """Create settings from a dictionary payload.

        Unknown keys are ignored; values given as text are coerced to the
        field's type.
        """
        known = {f.name: f for f in fields(cls)}
        data: Dict[str, Any] = {}
        for key, value in payload.items():
            if key not in known:
                LOGGER.debug("Ignoring unknown setting %r", key)
                continue
            data[key] = _coerce(getattr(cls(), key), value)
        return cls(**data)

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "LabSettings":
        """Load settings from disk, falling back to defaults."""
        settings_path = path or default_settings_path()
        if settings_path.is_file():
            try:
                payload = parse_key_values(settings_path.read_text(encoding="utf-8"))
                return cls.from_dict(payload)
            except (OSError, ValueError) as exc:
                LOGGER.warning("Ignoring unreadable settings file %s: %s", settings_path, exc)
        return cls()

    def save(self, path: Optional[Path] = None) -> None:
        """Persist the settings to disk as key=value lines."""
        settings_path = path or default_settings_path()
        settings_path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"{key}={_render(value)}" for key, value in sorted(self.to_dict().items())]
        settings_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def merged(self, **overrides: Any) -> "LabSettings":
        """Copy with the non-None overrides applied (CLI flags win over the file)."""
        applied = {key: value for key, value in overrides.items() if value is not None}
        if not applied:
            return self
        unknown = set(applied) - {f.name for f in fields(self)}
        if unknown:
            raise TypeError(f"unknown settings: {', '.join(sorted(unknown))}")
        return replace(
            self, **{key: _coerce(getattr(self, key), value) for key, value in applied.items()}
        )


def parse_key_values(text: str) -> Dict[str, str]:
    """Parse flat ``key=value`` text; ``#`` starts a comment line."""
    payload: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        payload[key.strip()] = value.strip()
    return payload


def default_settings_path() -> Path:
    """Resolve the path used to persist settings."""
    override = os.getenv(SETTINGS_ENV_VAR)
    if override:
        return Path(override)
    return Path.home() / ".config" / "coplab" / "settings.conf"


def default_metrics_log_path() -> Path:
    """Resolve the default path for the performance metrics log."""
    return default_settings_path().parent / "metrics.log"


def _coerce(default: Any, value: Any) -> Any:
    if isinstance(default, bool):
        if isinstance(value, str):
            return value.strip().lower() in {"1", "true", "yes", "on"}
        return bool(value)
    if isinstance(default, tuple):
        if isinstance(value, str):
            return tuple(int(part) for part in value.split(",") if part.strip())
        return tuple(int(part) for part in value)
    if isinstance(default, int):
        if isinstance(value, str) and "**" in value:
            base, exponent = value.split("**", 1)
            return int(base) ** int(exponent)
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def _render(value: Any) -> str:
    if isinstance(value, tuple):
        return ",".join(str(part) for part in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
