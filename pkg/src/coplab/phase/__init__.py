"""Phase-diagram scans, experiments and their serialization."""

from .experiments import (
    ExperimentConfig,
    ExperimentKind,
    HeavyHeadEntry,
    HeavyHeadReport,
    LdpMethod,
    LdpRateResult,
    experiment_heavy_head,
    experiment_ldp_rate,
    run_experiment,
)
from .scan import ProbeRecord, ScanRow, SearchBudget, hc_bracket, scan_phase
from .serialization import (
    CSV_HEADER,
    dumps,
    scan_csv_text,
    write_json,
    write_records,
    write_scan_csv,
)

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentKind",
    "HeavyHeadEntry",
    "HeavyHeadReport",
    "LdpMethod",
    "LdpRateResult",
    "ProbeRecord",
    "ScanRow",
    "SearchBudget",
    "dumps",
    "experiment_heavy_head",
    "experiment_ldp_rate",
    "hc_bracket",
    "run_experiment",
    "scan_csv_text",
    "scan_phase",
    "write_json",
    "write_records",
    "write_scan_csv",
]
