"""CSV and JSON output of scans, certificates and experiment reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Sequence, TextIO

import numpy as np

if TYPE_CHECKING:
    from .scan import ScanRow

LOGGER = logging.getLogger(__name__)

CSV_HEADER = (
    "lambda",
    "h_loc_max",
    "h_deloc_min",
    "h_lower_old",
    "h_upper",
    "h_lower_neutral",
    "slope_lower",
)


def format_float(value: float | None) -> str:
    """Round-trippable text for a float; empty for a missing value."""
    if value is None:
        return ""
    return format(float(value), ".17g")


def scan_csv_text(rows: Iterable["ScanRow"]) -> str:
    buffer = io.StringIO()
    _write_csv(rows, buffer)
    return buffer.getvalue()


def write_scan_csv(rows: Iterable["ScanRow"], path: str | Path | None = None) -> str:
    """Write the scan table to ``path`` (or return it only) and return the text."""
    text = scan_csv_text(rows)
    if path is not None:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        LOGGER.info("Wrote scan table to %s", target)
    return text


def _write_csv(rows: Iterable["ScanRow"], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                format_float(row.lam),
                format_float(row.h_loc_max),
                format_float(row.h_deloc_min),
                format_float(row.bounds.h_lower_old),
                format_float(row.bounds.h_upper),
                format_float(row.bounds.h_lower_neutral),
                format_float(row.bounds.slope_lower),
            ]
        )


def probe_filename(lam: float, h: float) -> str:
    return f"probe_{lam:.6g}_{h:.6g}.json"


def write_records(rows: Sequence["ScanRow"], directory: str | Path) -> list[Path]:
    """One JSON file per probed (lambda, h) holding every certificate run there."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    grouped: dict[str, list[dict[str, Any]]] = {}
    for row in rows:
        for probe in row.probes:
            grouped.setdefault(probe_filename(probe.lam, probe.h), []).append(probe.to_record())
    written = []
    for name, records in grouped.items():
        path = target / name
        path.write_text(dumps({"probes": records}), encoding="utf-8")
        written.append(path)
    LOGGER.info("Wrote %d probe records to %s", len(written), target)
    return written


def dumps(payload: Any) -> str:
    """Stable JSON text; non-finite floats are written as strings."""
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_json(payload: Any, path: str | Path | None = None) -> str:
    text = dumps(payload)
    if path is not None:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    return text


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value
