"""
Derivative series and fixed-duration segmentation.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..core.errors import InvalidInputError
from .filtering import FilterSpec, apply_filter, design_butterworth_lowpass


@dataclass(frozen=True, eq=False)
class DerivativeSeries:
    """First differences of a sample sequence."""

    values: np.ndarray
    source_length: int

    def __post_init__(self):
        if self.values.size != self.source_length - 1:
            raise InvalidInputError(
                f"Derivative length {self.values.size} does not match "
                f"source length {self.source_length} - 1"
            )

    def __len__(self) -> int:
        return int(self.values.size)


def differentiate(samples: Sequence[float]) -> DerivativeSeries:
    """
    First-order derivative: values[i] = samples[i+1] - samples[i].

    Raises:
        InvalidInputError: if fewer than two samples are given
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInputError(f"Need at least 2 samples to differentiate, got {x.size}")
    return DerivativeSeries(values=np.diff(x), source_length=int(x.size))


def segment(
    samples: Sequence[float], seconds: float, sample_rate_hz: float
) -> List[np.ndarray]:
    """
    Split samples into consecutive non-overlapping windows.

    Each window holds floor(seconds x sample_rate_hz) samples; a trailing
    remainder shorter than one window is dropped.

    Raises:
        InvalidInputError: if a window would hold less than one sample
    """
    if not seconds > 0 or not sample_rate_hz > 0:
        raise InvalidInputError(
            f"seconds and sample_rate_hz must be positive, got {seconds} and {sample_rate_hz}"
        )
    window = int(math.floor(seconds * sample_rate_hz + 1e-9))
    if window < 1:
        raise InvalidInputError(
            f"Segment of {seconds} s at {sample_rate_hz} Hz holds no samples"
        )
    x = np.asarray(samples, dtype=np.float64)
    count = x.size // window
    return [x[i * window : (i + 1) * window] for i in range(count)]


def preprocess(samples: Sequence[float], spec: FilterSpec) -> DerivativeSeries:
    """Filter then differentiate, the front end shared by enrollment and scoring."""
    coeffs = design_butterworth_lowpass(spec)
    return differentiate(apply_filter(coeffs, samples, zero_phase=spec.zero_phase))
