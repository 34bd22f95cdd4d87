"""Timing metrics and wall-clock budgets for long computations (opt-in logging)."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

LOGGER = logging.getLogger(__name__)

# Runtime budgets of the reference runs (seconds)
ORACLE_BUDGET_S = 60.0
QUADRATURE_BUDGET_S = 120.0
LOCALIZATION_BUDGET_S = 600.0
DELOCALIZATION_BUDGET_S = 1800.0


@dataclass
class MetricEvent:
    """Single timing measurement."""

    name: str
    duration_s: float
    timestamp: float = field(default_factory=time.time)
    metadata: Dict[str, str] = field(default_factory=dict)

    def exceeds_budget(self, budget_s: float) -> bool:
        """Check if this event exceeds the given budget."""
        return self.duration_s > budget_s

    def to_log_line(self) -> str:
        meta_str = ", ".join(f"{k}={v}" for k, v in self.metadata.items())
        return f"{self.name}: {self.duration_s:.3f}s [{meta_str}]"


class PerformanceMetrics:
    """Collects timings and logs them when telemetry is enabled."""

    def __init__(self, enabled: bool = False, log_path: Optional[Path] = None) -> None:
        """
        Initialize the metrics collector.

        Args:
            enabled: Whether metrics collection is active
            log_path: Optional path of an append-only metrics file
        """
        self._enabled = enabled
        self._log_path = log_path
        self._events: list[MetricEvent] = []
        self._in_progress: Dict[tuple[str, int], float] = {}
        self._lock = threading.Lock()

        if self._enabled and self._log_path:
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            LOGGER.info("Performance metrics enabled, logging to %s", self._log_path)

    @property
    def enabled(self) -> bool:
        return self._enabled

    def start(self, name: str) -> None:
        """Start timing an operation in the calling thread."""
        if not self._enabled:
            return
        with self._lock:
            self._in_progress[(name, threading.get_ident())] = time.perf_counter()

    def stop(self, name: str, **metadata: str) -> Optional[MetricEvent]:
        """Stop timing ``name`` and record the event; None when disabled."""
        if not self._enabled:
            return None
        with self._lock:
            started = self._in_progress.pop((name, threading.get_ident()), None)
        if started is None:
            return None
        duration_s = time.perf_counter() - started
        return self._store(MetricEvent(name=name, duration_s=duration_s, metadata=metadata))

    def record(self, name: str, duration_s: float, **metadata: str) -> MetricEvent:
        """Record an event with a known duration."""
        event = MetricEvent(name=name, duration_s=duration_s, metadata=metadata)
        if self._enabled:
            self._store(event)
        return event

    def get_events(self) -> list[MetricEvent]:
        with self._lock:
            return list(self._events)

    def clear(self) -> None:
        with self._lock:
            self._events.clear()
            self._in_progress.clear()

    def check_budget(
        self, name: str, duration_s: float, budget_s: float, **metadata: str
    ) -> bool:
        """Record a timing and report whether it stayed within ``budget_s``."""
        event = self.record(name, duration_s, **metadata)
        within_budget = not event.exceeds_budget(budget_s)
        if not within_budget:
            LOGGER.warning(
                "BUDGET EXCEEDED: %s took %.1fs (budget: %.1fs)",
                name,
                duration_s,
                budget_s,
            )
        return within_budget

    def _store(self, event: MetricEvent) -> MetricEvent:
        with self._lock:
            self._events.append(event)
        LOGGER.info("METRIC: %s", event.to_log_line())
        if self._log_path:
            try:
                with open(self._log_path, "a", encoding="utf-8") as f:
                    f.write(f"{event.timestamp:.3f},{event.to_log_line()}\n")
            except OSError as exc:
                LOGGER.warning("Failed to write metric to file: %s", exc)
        return event


class WallBudget:
    """Monotonic-clock deadline consulted between probes of a search."""

    def __init__(self, seconds: float) -> None:
        self._seconds = float(seconds)
        self._start = time.monotonic()

    @property
    def seconds(self) -> float:
        return self._seconds

    def elapsed(self) -> float:
        return time.monotonic() - self._start

    def remaining(self) -> float:
        return max(0.0, self._seconds - self.elapsed())

    def exhausted(self) -> bool:
        return self.elapsed() >= self._seconds

    def split(self, fraction: float) -> "WallBudget":
        """A new budget holding ``fraction`` of the remaining time, starting now."""
        return WallBudget(self.remaining() * min(max(fraction, 0.0), 1.0))


_global_metrics: Optional[PerformanceMetrics] = None


def initialize_metrics(enabled: bool, log_path: Optional[Path] = None) -> None:
    """Initialize the global metrics instance."""
    global _global_metrics
    _global_metrics = PerformanceMetrics(enabled=enabled, log_path=log_path)


def get_metrics() -> PerformanceMetrics:
    """Get the global metrics instance, initializing if needed."""
    global _global_metrics
    if _global_metrics is None:
        _global_metrics = PerformanceMetrics(enabled=False)
    return _global_metrics
