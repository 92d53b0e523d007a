"""
(k, d) parameter sweeps with per-cell checkpoints.

Codebooks depend only on the training data and the alphabet size, so they
are trained once per participant and shared by every cell. Cells run in
parallel on the caller's executor; inside a cell evaluation is serial.
Completed cells leave a marker file under `<out>/cells/` so an interrupted
sweep can resume without recomputing them.
"""

import logging
import math
import time
from concurrent.futures import Executor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from ..core.errors import InvalidInputError, ModelDecodeError, NrcIdError
from ..core.files import PathLike, atomic_write_text
from ..identity import train_codebook
from ..quantizer import Codebook, format_real
from .protocol import EvalProtocol, _map, check_dataset, evaluate

logger = logging.getLogger(__name__)

CELLS_DIR = "cells"
STATUS_OK = "ok"
STATUS_FAILED = "failed"

Cell = Tuple[int, int]


@dataclass(frozen=True)
class SweepRow:
    k: int
    d: int
    accuracy: float
    macro_f1: float
    seconds: float
    status: str = STATUS_OK
    error: str = ""

    @property
    def cell(self) -> Cell:
        return (self.k, self.d)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


# =============================================================================
# Cell markers
# =============================================================================


def cell_marker_path(out_dir: PathLike, k: int, d: int) -> Path:
    return Path(out_dir) / CELLS_DIR / f"k{k}_d{d}.done"


def write_cell_marker(out_dir: PathLike, row: SweepRow) -> Path:
    lines = [
        f"k={row.k}",
        f"d={row.d}",
        f"accuracy={format_real(row.accuracy)}",
        f"macro_f1={format_real(row.macro_f1)}",
        f"seconds={format_real(row.seconds)}",
        f"status={row.status}",
        f"error={' '.join(row.error.split())}",
    ]
    return atomic_write_text(cell_marker_path(out_dir, row.k, row.d), "\n".join(lines) + "\n")


def read_cell_marker(path: PathLike) -> SweepRow:
    """
    Parse a cell marker.

    Raises:
        ModelDecodeError: the marker is malformed
    """
    path = Path(path)
    values: Dict[str, str] = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        key, sep, value = line.partition("=")
        if not sep:
            raise ModelDecodeError(f"Malformed cell marker {path}", line=number)
        values[key] = value
    try:
        return SweepRow(
            k=int(values["k"]),
            d=int(values["d"]),
            accuracy=float(values["accuracy"]),
            macro_f1=float(values["macro_f1"]),
            seconds=float(values["seconds"]),
            status=values["status"],
            error=values.get("error", ""),
        )
    except (KeyError, ValueError) as e:
        raise ModelDecodeError(f"Malformed cell marker {path}: {e!r}") from e


def read_completed_cells(out_dir: PathLike) -> Dict[Cell, SweepRow]:
    """Successful cells recorded under `<out_dir>/cells/`; failed or unreadable markers are rerun."""
    cells_dir = Path(out_dir) / CELLS_DIR
    completed: Dict[Cell, SweepRow] = {}
    if not cells_dir.is_dir():
        return completed
    for path in sorted(cells_dir.glob("*.done")):
        try:
            row = read_cell_marker(path)
        except (OSError, ModelDecodeError) as e:
            logger.warning(f"[sweep] ignoring unreadable marker {path}: {e}")
            continue
        if row.ok:
            completed[row.cell] = row
    return completed


# =============================================================================
# Sweep
# =============================================================================


def _train_codebooks(dataset, protocol: EvalProtocol, executor: Optional[Executor]) -> Dict[str, Codebook]:
    by_participant = check_dataset(dataset, protocol)
    participants = sorted(by_participant)

    def train_one(pid: str):
        recordings = [by_participant[pid][s] for s in protocol.train_sessions]
        try:
            return train_codebook(recordings, protocol.filter, protocol.qspec)
        except InvalidInputError as e:
            logger.warning(f"[sweep] no shared codebook for {pid}: {e}")
            return None

    trained = _map(executor, train_one, participants)
    return {pid: cb for pid, cb in zip(participants, trained) if cb is not None}


def sweep(
    dataset: Sequence,
    protocol: EvalProtocol,
    k_values: Sequence[int],
    d_values: Sequence[int],
    executor: Optional[Executor] = None,
    checkpoint_dir: Optional[PathLike] = None,
    resume: bool = False,
) -> List[SweepRow]:
    """
    Evaluate every (k, d) combination of the given value lists.

    Rows come back in k-major order of the requested lists, duplicates
    included; a duplicated cell is computed once. A cell whose evaluation
    fails is recorded with status "failed" and the sweep moves on.

    Args:
        dataset: All recordings
        protocol: Template protocol; its params supply alphabet size and alpha
        k_values: Context orders to try
        d_values: Depths to try
        executor: Optional executor; cells run concurrently on it
        checkpoint_dir: Directory for per-cell completion markers
        resume: Reuse successful markers found in checkpoint_dir

    Raises:
        InvalidInputError: an empty value list
        InvalidDatasetError: the dataset does not fit the protocol
    """
    if not k_values or not d_values:
        raise InvalidInputError("Sweep needs non-empty k and d value lists")

    dataset = list(dataset)
    cells: List[Cell] = [(int(k), int(d)) for k in k_values for d in d_values]
    unique = list(dict.fromkeys(cells))
    done = read_completed_cells(checkpoint_dir) if (checkpoint_dir is not None and resume) else {}
    if done:
        logger.info(f"[sweep] resuming: {len(set(unique) & set(done))} of {len(unique)} cells already done")

    pending = [cell for cell in unique if cell not in done]
    codebooks = _train_codebooks(dataset, protocol, executor) if pending else {}

    def run_cell(cell: Cell) -> SweepRow:
        if cell in done:
            return done[cell]
        k, d = cell
        start = time.perf_counter()
        try:
            params = replace(protocol.params, k=k, d=d)
            report = evaluate(dataset, replace(protocol, params=params), codebooks=codebooks)
            row = SweepRow(k, d, report.accuracy, report.macro_f1, time.perf_counter() - start)
        except NrcIdError as e:
            logger.error(f"[sweep] cell k={k} d={d} failed: {e}")
            row = SweepRow(k, d, math.nan, math.nan, time.perf_counter() - start, STATUS_FAILED, str(e))
        if checkpoint_dir is not None:
            write_cell_marker(checkpoint_dir, row)
        logger.info(f"[sweep] k={k} d={d} status={row.status} accuracy={row.accuracy:.4f}")
        return row

    by_cell = dict(zip(unique, _map(executor, run_cell, unique)))
    return [by_cell[cell] for cell in cells]
