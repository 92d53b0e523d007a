"""
Evaluation protocol, metrics, sweeps, synthetic cohorts and report files.
"""

from .metrics import ClassMetrics, ConfusionMatrix, Metrics, metrics
from .protocol import EvalProtocol, EvalReport, SegmentOutcome, check_dataset, evaluate
from .report import (
    CONFUSION_FILE,
    METRICS_FILE,
    PER_SEGMENT_FILE,
    SWEEP_FILE,
    write_report,
    write_sweep,
)
from .sweep import SweepRow, read_completed_cells, sweep
from .synthetic import (
    DEFAULT_NOISE_CUTOFF_HZ,
    ParticipantSignature,
    SyntheticSpec,
    default_synthetic_spec,
    dump_synthetic_spec,
    generate_synthetic,
    load_synthetic_spec,
    noise_std_for_snr,
    save_synthetic_spec,
    synthetic_spec_from_dict,
    synthetic_spec_to_dict,
    unit_noise,
)

__all__ = [
    # Metrics
    "ClassMetrics",
    "ConfusionMatrix",
    "Metrics",
    "metrics",
    # Protocol
    "EvalProtocol",
    "EvalReport",
    "SegmentOutcome",
    "check_dataset",
    "evaluate",
    # Sweep
    "SweepRow",
    "read_completed_cells",
    "sweep",
    # Reports
    "CONFUSION_FILE",
    "METRICS_FILE",
    "PER_SEGMENT_FILE",
    "SWEEP_FILE",
    "write_report",
    "write_sweep",
    # Synthetic data
    "DEFAULT_NOISE_CUTOFF_HZ",
    "ParticipantSignature",
    "SyntheticSpec",
    "default_synthetic_spec",
    "dump_synthetic_spec",
    "generate_synthetic",
    "load_synthetic_spec",
    "noise_std_for_snr",
    "save_synthetic_spec",
    "synthetic_spec_from_dict",
    "synthetic_spec_to_dict",
    "unit_noise",
]
