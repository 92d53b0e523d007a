"""
Text form of a codebook, as embedded in participant-model files:

    L=<int>
    breakpoints=<comma-separated reals>
    levels=<comma-separated reals>

Reals are written with 17 significant digits so they read back exactly.
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..core.errors import InvalidSpecError, ModelDecodeError, TruncatedStreamError
from .lloyd_max import Codebook


def format_real(value: float) -> str:
    return f"{float(value):.17g}"


def codebook_to_lines(codebook: Codebook) -> List[str]:
    """Render a codebook as its three text lines."""
    return [
        f"L={codebook.alphabet_size}",
        "breakpoints=" + ",".join(format_real(v) for v in codebook.breakpoints),
        "levels=" + ",".join(format_real(v) for v in codebook.levels),
    ]


def codebook_from_lines(lines: Sequence[Tuple[int, str]]) -> Codebook:
    """
    Parse the codebook block.

    Args:
        lines: (line number, text) pairs of the block

    Raises:
        ModelDecodeError: malformed or inconsistent block (with the offending line)
        TruncatedStreamError: a required line is missing
    """
    values = {}
    for number, text in lines:
        key, sep, value = text.partition("=")
        if not sep or key not in ("L", "breakpoints", "levels"):
            raise ModelDecodeError(f"Unexpected codebook line {text!r}", line=number)
        values[key] = (number, value)

    for key in ("L", "breakpoints", "levels"):
        if key not in values:
            last = lines[-1][0] if lines else None
            raise TruncatedStreamError(f"Codebook block is missing '{key}'", line=last)

    number, raw = values["L"]
    try:
        size = int(raw)
    except ValueError as e:
        raise ModelDecodeError(f"Bad alphabet size {raw!r}", line=number) from e

    def reals(key: str) -> np.ndarray:
        number, raw = values[key]
        try:
            return np.array([float(v) for v in raw.split(",")] if raw else [], dtype=np.float64)
        except ValueError as e:
            raise ModelDecodeError(f"Bad {key} value list", line=number) from e

    breakpoints = reals("breakpoints")
    levels = reals("levels")
    if levels.size != size:
        raise ModelDecodeError(
            f"L={size} but {levels.size} levels are listed", line=values["levels"][0]
        )
    try:
        return Codebook(breakpoints=breakpoints, levels=levels)
    except InvalidSpecError as e:
        raise ModelDecodeError(f"Invalid codebook: {e}", line=values["L"][0]) from e
