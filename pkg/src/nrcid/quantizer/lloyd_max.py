"""
Empirical Lloyd-Max scalar quantization.

Codebooks are learned directly from observed derivative samples: breakpoints
are midpoints of adjacent levels and levels are the means of the samples in
their cell. Values exactly on a breakpoint belong to the upper cell.
"""

import logging
import math
import string
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from ..core.errors import DegenerateDataError, InvalidInputError, InvalidSpecError

logger = logging.getLogger(__name__)

ALPHABET = string.ascii_uppercase
_ALPHABET_BYTES = np.frombuffer(ALPHABET.encode("ascii"), dtype=np.uint8)

DEFAULT_ALPHABET_SIZE = 17
DEFAULT_MAX_ITERATIONS = 200
DEFAULT_TOLERANCE = 1e-9


def alphabet(size: int) -> str:
    """The first `size` letters, 'A' upward."""
    return ALPHABET[:size]


@dataclass(frozen=True)
class QuantizerSpec:
    """Lloyd-Max training parameters. tolerance is a relative MSE change."""

    alphabet_size: int = DEFAULT_ALPHABET_SIZE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not 2 <= self.alphabet_size <= len(ALPHABET):
            raise InvalidSpecError(
                f"alphabet_size must be in [2, {len(ALPHABET)}], got {self.alphabet_size}"
            )
        if self.max_iterations < 1:
            raise InvalidSpecError(f"max_iterations must be positive, got {self.max_iterations}")
        if not self.tolerance > 0:
            raise InvalidSpecError(f"tolerance must be positive, got {self.tolerance}")


@dataclass(frozen=True, eq=False)
class Codebook:
    """Cell boundaries (L-1 breakpoints) and reconstruction levels (L values)."""

    breakpoints: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        breakpoints = np.asarray(self.breakpoints, dtype=np.float64).ravel()
        levels = np.asarray(self.levels, dtype=np.float64).ravel()
        size = levels.size
        if not 2 <= size <= len(ALPHABET):
            raise InvalidSpecError(f"Codebook needs 2..{len(ALPHABET)} levels, got {size}")
        if breakpoints.size != size - 1:
            raise InvalidSpecError(
                f"Codebook with {size} levels needs {size - 1} breakpoints, got {breakpoints.size}"
            )
        if not (np.all(np.isfinite(levels)) and np.all(np.isfinite(breakpoints))):
            raise InvalidSpecError("Codebook values must be finite")
        if np.any(np.diff(levels) <= 0) or np.any(np.diff(breakpoints) <= 0):
            raise InvalidSpecError("Codebook levels and breakpoints must be strictly increasing")
        if np.any(levels[:-1] > breakpoints) or np.any(levels[1:] < breakpoints):
            raise InvalidSpecError("Every codebook level must lie within its cell")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "levels", levels)

    @property
    def alphabet_size(self) -> int:
        return int(self.levels.size)

    @property
    def symbols(self) -> str:
        return alphabet(self.alphabet_size)

    @classmethod
    def from_levels(cls, levels: Sequence[float]) -> "Codebook":
        """Codebook whose breakpoints are the midpoints of the given sorted levels."""
        levels = np.asarray(levels, dtype=np.float64)
        return cls(breakpoints=(levels[:-1] + levels[1:]) / 2.0, levels=levels)

    def cell_index(self, values: Sequence[float]) -> np.ndarray:
        """Cell index per value; ties at a breakpoint go to the upper cell."""
        return np.searchsorted(self.breakpoints, np.asarray(values, dtype=np.float64), side="right")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return np.array_equal(self.levels, other.levels) and np.array_equal(
            self.breakpoints, other.breakpoints
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LloydIteration:
    """State after one Lloyd step: levels for the next partition and the step's MSE."""

    iteration: int
    levels: np.ndarray
    mse: float


def _training_array(data: Sequence[float], alphabet_size: int) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64).ravel()
    if x.size == 0:
        raise InvalidInputError("Cannot train a quantizer on empty data")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("Quantizer training data must be finite")
    distinct = np.unique(x).size
    if distinct < alphabet_size:
        raise DegenerateDataError(
            f"Need at least {alphabet_size} distinct values to train {alphabet_size} cells, "
            f"got {distinct}"
        )
    return x


def _mean_square(residual: np.ndarray) -> float:
    return math.fsum(np.square(residual).tolist()) / residual.size


def _initial_levels(sorted_x: np.ndarray, size: int) -> np.ndarray:
    """Empirical (inverted CDF) quantiles at probabilities (i - 0.5) / L."""
    probs = (np.arange(1, size + 1) - 0.5) / size
    ranks = np.ceil(sorted_x.size * probs).astype(np.int64) - 1
    return sorted_x[np.clip(ranks, 0, sorted_x.size - 1)].copy()


def _reseed_one_empty_cell(
    x: np.ndarray, idx: np.ndarray, levels: np.ndarray, counts: np.ndarray
) -> np.ndarray:
    """
    Move the first empty cell's level into the most populated cell that still
    holds at least two distinct values, then re-sort the levels.
    """
    empty = int(np.flatnonzero(counts == 0)[0])
    best = None
    for cell in np.argsort(-counts, kind="stable"):
        if counts[cell] < 2:
            break
        members = x[idx == cell]
        low, high = float(members.min()), float(members.max())
        if low < high:
            best = (int(cell), low, high)
            break
    if best is None:
        return levels

    cell, low, high = best
    seed = (low + high) / 2.0
    if seed == levels[cell]:
        seed = (low + levels[cell]) / 2.0
    levels = levels.copy()
    levels[empty] = seed
    logger.debug(f"[lloyd_max] reseeded empty cell {empty} inside cell {cell} at {seed!r}")
    return np.sort(levels)


def lloyd_max_iterations(
    data: Sequence[float],
    spec: QuantizerSpec,
    initial_levels: Optional[Sequence[float]] = None,
) -> Iterator[LloydIteration]:
    """
    Run Lloyd iterations, yielding the state after each step.

    Each step partitions the data at the midpoints of the current levels and
    moves every occupied cell's level to its mean. The reported MSE is measured
    after the mean update, so it never increases from one step to the next.
    Cell sums are exactly rounded, so training on two copies of the data
    yields the same codebook as one copy. Iteration stops when the relative
    MSE change drops below spec.tolerance (with no empty cells) or after
    spec.max_iterations steps.

    Args:
        data: Training values
        spec: Quantizer parameters
        initial_levels: Starting levels; defaults to empirical quantiles at (i - 0.5) / L

    Raises:
        InvalidInputError: empty or non-finite data
        DegenerateDataError: fewer distinct values than cells
    """
    size = spec.alphabet_size
    x = np.sort(_training_array(data, size), kind="stable")

    if initial_levels is None:
        levels = _initial_levels(x, size)
    else:
        levels = np.sort(np.asarray(initial_levels, dtype=np.float64).ravel())
        if levels.size != size:
            raise InvalidSpecError(f"Expected {size} initial levels, got {levels.size}")

    previous_mse = None
    for iteration in range(1, spec.max_iterations + 1):
        breakpoints = (levels[:-1] + levels[1:]) / 2.0
        idx = np.searchsorted(breakpoints, x, side="right")
        # x is sorted, so every cell is a contiguous run
        edges = np.concatenate(([0], np.searchsorted(x, breakpoints, side="left"), [x.size]))
        counts = np.diff(edges)

        occupied = counts > 0
        levels = levels.copy()
        for cell in np.flatnonzero(occupied):
            total = math.fsum(x[edges[cell] : edges[cell + 1]].tolist())
            levels[cell] = total / counts[cell]
        mse = _mean_square(x - levels[idx])

        all_occupied = bool(occupied.all())
        if not all_occupied:
            levels = _reseed_one_empty_cell(x, idx, levels, counts)

        yield LloydIteration(iteration=iteration, levels=levels.copy(), mse=mse)

        if all_occupied:
            if mse == 0.0:
                break
            if previous_mse is not None and (previous_mse - mse) < spec.tolerance * previous_mse:
                break
        previous_mse = mse


def train_lloyd_max(
    data: Sequence[float],
    spec: QuantizerSpec,
    initial_levels: Optional[Sequence[float]] = None,
) -> Codebook:
    """
    Learn an empirical Lloyd-Max codebook.

    Args:
        data: Training values (e.g. concatenated derivative samples)
        spec: Quantizer parameters
        initial_levels: Optional starting levels for refinement

    Returns:
        Codebook satisfying the Lloyd conditions on the data

    Raises:
        InvalidInputError: empty data
        DegenerateDataError: fewer than L distinct values, or cells could not be separated
    """
    last = None
    for last in lloyd_max_iterations(data, spec, initial_levels=initial_levels):
        pass

    levels = last.levels
    if np.any(np.diff(levels) <= 0):
        raise DegenerateDataError(
            f"Lloyd iteration left coincident levels after {last.iteration} iterations"
        )
    codebook = Codebook.from_levels(levels)
    logger.debug(
        f"[train_lloyd_max] L={spec.alphabet_size} iterations={last.iteration} mse={last.mse:.6g}"
    )
    return codebook


def quantize(codebook: Codebook, values: Sequence[float]) -> str:
    """
    Map values to symbols 'A'.. by cell index.

    Values below the first breakpoint map to 'A'; values at or above the last
    breakpoint (including +inf) map to the last symbol.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        return ""
    return _ALPHABET_BYTES[codebook.cell_index(v)].tobytes().decode("ascii")


def dequantize(codebook: Codebook, symbols: str) -> np.ndarray:
    """Reconstruction level of every symbol."""
    if not symbols:
        return np.empty(0, dtype=np.float64)
    codes = np.frombuffer(symbols.encode("ascii"), dtype=np.uint8) - ord("A")
    if np.any(codes >= codebook.alphabet_size):
        raise InvalidInputError(f"Symbols outside {codebook.symbols!r}")
    return codebook.levels[codes]


def distortion(codebook: Codebook, data: Sequence[float]) -> float:
    """
    Mean squared error between each value and its cell's level.

    Raises:
        InvalidInputError: empty data
    """
    x = np.asarray(data, dtype=np.float64).ravel()
    if x.size == 0:
        raise InvalidInputError("Cannot measure distortion of empty data")
    return _mean_square(x - codebook.levels[codebook.cell_index(x)])
