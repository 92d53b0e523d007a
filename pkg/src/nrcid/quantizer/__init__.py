"""
Per-participant Lloyd-Max quantization of derivative series.
"""

from .codec import codebook_from_lines, codebook_to_lines, format_real
from .lloyd_max import (
    ALPHABET,
    DEFAULT_ALPHABET_SIZE,
    Codebook,
    LloydIteration,
    QuantizerSpec,
    alphabet,
    dequantize,
    distortion,
    lloyd_max_iterations,
    quantize,
    train_lloyd_max,
)

__all__ = [
    "ALPHABET",
    "DEFAULT_ALPHABET_SIZE",
    "Codebook",
    "LloydIteration",
    "QuantizerSpec",
    "alphabet",
    "codebook_from_lines",
    "codebook_to_lines",
    "dequantize",
    "distortion",
    "format_real",
    "lloyd_max_iterations",
    "quantize",
    "train_lloyd_max",
]
