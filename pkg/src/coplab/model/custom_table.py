"""Text format for explicit return-law tables.

A table file lists the head masses one per line as ``n<TAB>K(n)`` for
n = 1..n0 and ends with a footer ``tail<TAB>alpha<TAB>C_K`` that declares the
power-law continuation C_K * n^-(1+alpha) for n > n0. Blank lines and lines
starting with ``#`` are ignored.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .exceptions import CopolymerLabError, LawFormatError
from .laws import DEFAULT_N_MAX, NORMALIZATION_TOLERANCE, ReturnLaw

LOGGER = logging.getLogger(__name__)

FOOTER_TAG = "tail"


def load_custom_table(
    path: str | Path,
    n_max: int = DEFAULT_N_MAX,
    tolerance: float = NORMALIZATION_TOLERANCE,
) -> ReturnLaw:
    """Parse a table file into a normalized CustomTable law.

    Raises:
        LawFormatError: On unreadable files, malformed lines, a missing footer
            or a total mass farther than ``tolerance`` from 1.
    """
    table_path = Path(path)
    try:
        text = table_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LawFormatError(f"cannot read table: {exc}", str(table_path)) from exc

    head: list[tuple[int, float]] = []
    footer: tuple[float, float] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if footer is not None:
            raise LawFormatError("content after the tail footer", str(table_path), lineno)
        fields = line.split("\t")
        try:
            if fields[0].strip().lower() == FOOTER_TAG:
                if len(fields) != 3:
                    raise LawFormatError(
                        "footer must read tail<TAB>alpha<TAB>C_K", str(table_path), lineno
                    )
                footer = (float(fields[1]), float(fields[2]))
                continue
            if len(fields) != 2:
                raise LawFormatError("expected n<TAB>K(n)", str(table_path), lineno)
            head.append((int(fields[0]), float(fields[1])))
        except ValueError as exc:
            if isinstance(exc, LawFormatError):
                raise
            raise LawFormatError(f"unparsable number: {exc}", str(table_path), lineno) from exc

    if footer is None:
        raise LawFormatError("missing tail footer", str(table_path))
    alpha, c_k = footer
    try:
        law = ReturnLaw.custom_table(head, alpha, c_k, n_max=n_max, tolerance=tolerance)
    except CopolymerLabError as exc:
        raise LawFormatError(str(exc), str(table_path)) from exc
    LOGGER.debug("Loaded custom law from %s: n0=%d alpha=%g", table_path, len(head), alpha)
    return law


def save_custom_table(law: ReturnLaw, path: str | Path, head_size: int | None = None) -> Path:
    """Write ``law`` in the table format.

    The first ``head_size`` masses (default: the law's own head, at least one
    entry) are written explicitly and the tail is declared through
    ``law.c_k`` and ``law.alpha``. Only laws whose masses beyond the head are
    exactly c_k * n^-(1+alpha) round-trip; for the simple random walk pass a
    head large enough that the remaining discrepancy is below the load tolerance.
    """
    size = head_size if head_size is not None else max(law.head_size, 1)
    table_path = Path(path)
    table_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{n}\t{float(law.mass_table[n])!r}" for n in range(1, size + 1)]
    lines.append(f"{FOOTER_TAG}\t{law.alpha!r}\t{law.c_k!r}")
    table_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return table_path
