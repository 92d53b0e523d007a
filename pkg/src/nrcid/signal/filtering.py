"""
Butterworth low-pass design and application.

The filter is realized as cascaded second-order sections designed with the
bilinear transform (cutoff prewarped so the discrete -3.01 dB point lands on
cutoff_hz). Zero-phase application runs the cascade forward then backward
with odd (reflected) edge padding.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal as sps

from ..core.errors import InvalidInputError, InvalidSpecError, InvariantViolation

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 5
DEFAULT_CUTOFF_HZ = 30.0

DC_GAIN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass filter parameters. zero_phase=False selects single-pass causal filtering."""

    sample_rate_hz: float
    order: int = DEFAULT_ORDER
    cutoff_hz: float = DEFAULT_CUTOFF_HZ
    zero_phase: bool = True

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise InvalidSpecError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if int(self.order) != self.order or self.order < 1:
            raise InvalidSpecError(f"filter order must be a positive integer, got {self.order}")
        nyquist = self.sample_rate_hz / 2.0
        if not 0 < self.cutoff_hz < nyquist:
            raise InvalidSpecError(
                f"cutoff_hz must lie in (0, {nyquist:g}) for fs={self.sample_rate_hz:g} Hz, "
                f"got {self.cutoff_hz}"
            )

    @property
    def padlen(self) -> int:
        """Edge padding length used by zero-phase filtering."""
        return 3 * (2 * self.order + 1)


@dataclass(frozen=True, eq=False)
class FilterCoefficients:
    """
    Cascade of second-order sections.

    sos has shape (n_sections, 6): three feedforward then three feedback
    coefficients per section, with the first feedback coefficient equal to 1.
    """

    sos: np.ndarray
    spec: FilterSpec

    @property
    def sections(self) -> int:
        return int(self.sos.shape[0])

    def dc_gain(self) -> float:
        """Cascade gain at 0 Hz."""
        b = self.sos[:, :3].sum(axis=1)
        a = self.sos[:, 3:].sum(axis=1)
        return float(np.prod(b / a))

    def poles(self) -> np.ndarray:
        """All poles of the cascade."""
        return np.concatenate([np.roots(section[3:]) for section in self.sos])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))


@functools.lru_cache(maxsize=32)
def design_butterworth_lowpass(spec: FilterSpec) -> FilterCoefficients:
    """
    Design an order-N Butterworth low-pass filter as second-order sections.

    Args:
        spec: Validated filter specification

    Returns:
        FilterCoefficients whose cascade has unit DC gain and stable sections

    Raises:
        InvariantViolation: if the designed cascade is unstable or its DC gain
            deviates from 1 (should never happen for a valid spec)
    """
    sos = sps.butter(
        spec.order, spec.cutoff_hz, btype="low", output="sos", fs=spec.sample_rate_hz
    )
    sos = np.ascontiguousarray(sos, dtype=np.float64)
    coeffs = FilterCoefficients(sos=sos, spec=spec)

    if not coeffs.is_stable():
        raise InvariantViolation(f"Designed filter is unstable for {spec}")
    gain = coeffs.dc_gain()
    if abs(gain - 1.0) > DC_GAIN_TOLERANCE:
        raise InvariantViolation(f"Designed filter DC gain {gain!r} differs from 1")

    logger.debug(
        f"[design_butterworth_lowpass] order={spec.order} cutoff={spec.cutoff_hz} Hz "
        f"fs={spec.sample_rate_hz} Hz sections={coeffs.sections}"
    )
    return coeffs


def frequency_response(coeffs: FilterCoefficients, freqs_hz: Sequence[float]) -> np.ndarray:
    """Single-pass magnitude response |H(f)| at the given frequencies."""
    freqs = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
    _, h = sps.sosfreqz(coeffs.sos, worN=freqs, fs=coeffs.spec.sample_rate_hz)
    return np.abs(h)


def apply_filter(
    coeffs: FilterCoefficients, samples: Sequence[float], zero_phase: bool = True
) -> np.ndarray:
    """
    Apply the cascade to a sample sequence.

    Args:
        coeffs: Designed filter
        samples: Input samples
        zero_phase: Forward-backward application when True, causal single pass otherwise

    Returns:
        Filtered samples, same length as the input

    Raises:
        InvalidInputError: if the input is not longer than 3 x order samples
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"Expected a 1-D sample sequence, got shape {x.shape}")
    order = coeffs.spec.order
    if x.size <= 3 * order:
        raise InvalidInputError(
            f"Need more than {3 * order} samples to filter, got {x.size}"
        )
    if not zero_phase:
        return sps.sosfilt(coeffs.sos, x)
    padlen = min(coeffs.spec.padlen, x.size - 1)
    return sps.sosfiltfilt(coeffs.sos, x, padtype="odd", padlen=padlen)


def filter_zero_phase(coeffs: FilterCoefficients, samples: Sequence[float]) -> np.ndarray:
    """Zero-phase (forward-backward) filtering with reflected edge padding."""
    return apply_filter(coeffs, samples, zero_phase=True)
