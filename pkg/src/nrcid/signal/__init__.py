"""
Signal front end: recordings, Butterworth filtering, derivatives, segments.
"""

from .filtering import (
    DEFAULT_CUTOFF_HZ,
    DEFAULT_ORDER,
    FilterCoefficients,
    FilterSpec,
    apply_filter,
    design_butterworth_lowpass,
    filter_zero_phase,
    frequency_response,
)
from .recordings import (
    MANIFEST_NAME,
    Manifest,
    RawRecording,
    common_sample_rate,
    discover_dataset,
    load_dataset,
    read_recording,
    read_segment,
    write_dataset,
    write_recording,
)
from .series import DerivativeSeries, differentiate, preprocess, segment

__all__ = [
    # Filtering
    "DEFAULT_CUTOFF_HZ",
    "DEFAULT_ORDER",
    "FilterCoefficients",
    "FilterSpec",
    "apply_filter",
    "design_butterworth_lowpass",
    "filter_zero_phase",
    "frequency_response",
    # Recordings
    "MANIFEST_NAME",
    "Manifest",
    "RawRecording",
    "common_sample_rate",
    "discover_dataset",
    "load_dataset",
    "read_recording",
    "read_segment",
    "write_dataset",
    "write_recording",
    # Series
    "DerivativeSeries",
    "differentiate",
    "preprocess",
    "segment",
]
