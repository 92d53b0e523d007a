"""
Results directory writers.

    confusion.csv    true ids down, predicted ids across
    metrics.txt      key=value lines
    per_segment.csv  true,predicted,rank1,nrc1,rank2,nrc2,rank3,nrc3
    sweep.csv        k,d,accuracy,macro_f1,seconds,status

Reals use 17 significant digits so reruns compare byte for byte; only the
sweep `seconds` column (wall time) varies between runs.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Sequence

import pandas as pd

from ..core.files import PathLike, atomic_write_text
from ..quantizer import format_real
from ..xafcm import format_alpha
from .protocol import EvalReport
from .sweep import SweepRow

logger = logging.getLogger(__name__)

CONFUSION_FILE = "confusion.csv"
METRICS_FILE = "metrics.txt"
PER_SEGMENT_FILE = "per_segment.csv"
SWEEP_FILE = "sweep.csv"
TOP_N = 3


def _real(value: float) -> str:
    return "" if math.isnan(value) else format_real(value)


def _csv(frame: pd.DataFrame, index: bool = False) -> str:
    return frame.to_csv(index=index, lineterminator="\n")


def confusion_frame(report: EvalReport) -> pd.DataFrame:
    labels = list(report.confusion.labels)
    frame = pd.DataFrame(report.confusion.counts, index=labels, columns=labels)
    frame.index.name = "true"
    return frame


def per_segment_frame(report: EvalReport) -> pd.DataFrame:
    columns = ["true", "predicted"]
    for rank in range(1, TOP_N + 1):
        columns += [f"rank{rank}", f"nrc{rank}"]
    rows = []
    for outcome in report.per_segment:
        row = [outcome.true_id, outcome.result.predicted]
        top = outcome.result.top(TOP_N)
        for rank in range(TOP_N):
            if rank < len(top):
                row += [top[rank][0], format_real(top[rank][1])]
            else:
                row += ["", ""]
        rows.append(row)
    return pd.DataFrame(rows, columns=columns, dtype=str)


def metrics_lines(report: EvalReport) -> List[str]:
    params = report.protocol.params
    lines = [
        f"accuracy={format_real(report.accuracy)}",
        f"macro_f1={format_real(report.macro_f1)}",
        f"micro_f1={format_real(report.micro_f1)}",
        f"segments={report.segments}",
        f"participants={len(report.confusion.labels)}",
        "failed_enrollments=" + ",".join(sorted(report.failed_enrollments)),
        f"k={params.k}",
        f"d={params.d}",
        f"alphabet_size={params.alphabet_size}",
        f"alpha={format_alpha(params.alpha)}",
    ]
    for label, m in report.per_class.items():
        lines += [
            f"{label}_precision={format_real(m.precision)}",
            f"{label}_recall={format_real(m.recall)}",
            f"{label}_f1={format_real(m.f1)}",
            f"{label}_support={m.support}",
        ]
    return lines


def write_report(report: EvalReport, out_dir: PathLike) -> Dict[str, Path]:
    """
    Write confusion.csv, metrics.txt and per_segment.csv atomically.

    Returns:
        File name -> written path
    """
    out = Path(out_dir)
    written = {
        CONFUSION_FILE: atomic_write_text(out / CONFUSION_FILE, _csv(confusion_frame(report), index=True)),
        METRICS_FILE: atomic_write_text(out / METRICS_FILE, "\n".join(metrics_lines(report)) + "\n"),
        PER_SEGMENT_FILE: atomic_write_text(out / PER_SEGMENT_FILE, _csv(per_segment_frame(report))),
    }
    logger.info(f"[write_report] wrote {', '.join(written)} to {out}")
    return written


def sweep_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "k": str(row.k),
                "d": str(row.d),
                "accuracy": _real(row.accuracy),
                "macro_f1": _real(row.macro_f1),
                "seconds": f"{row.seconds:.3f}",
                "status": row.status,
            }
            for row in rows
        ],
        columns=["k", "d", "accuracy", "macro_f1", "seconds", "status"],
        dtype=str,
    )


def write_sweep(rows: Sequence[SweepRow], out_dir: PathLike) -> Path:
    path = atomic_write_text(Path(out_dir) / SWEEP_FILE, _csv(sweep_frame(rows)))
    logger.info(f"[write_sweep] {len(rows)} rows -> {path}")
    return path
