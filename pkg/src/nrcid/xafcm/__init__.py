"""
Extended-alphabet finite-context models: counting, bit estimation, codec.
"""

from .codec import FORMAT_VERSION, deserialize, model_from_lines, model_to_lines, serialize
from .model import (
    AUTO,
    CompressionResult,
    CountsTable,
    ModelParams,
    XaModel,
    alpha_resolve,
    block_bits,
    compress_bits,
    estimate_probability,
    format_alpha,
    learn,
    parse_alpha,
)

__all__ = [
    "AUTO",
    "FORMAT_VERSION",
    "CompressionResult",
    "CountsTable",
    "ModelParams",
    "XaModel",
    "alpha_resolve",
    "block_bits",
    "compress_bits",
    "deserialize",
    "estimate_probability",
    "format_alpha",
    "learn",
    "model_from_lines",
    "model_to_lines",
    "parse_alpha",
    "serialize",
]
