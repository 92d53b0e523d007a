"""
Participant-model file container.

    [meta]
    format=1
    participant_id=<id>
    k=<int>
    d=<int>
    alphabet_size=<int>
    alpha=<auto|real>
    sample_rate_hz=<real>
    filter_order=<int>
    cutoff_hz=<real>
    sessions=<session>:<symbols>,...
    [codebook]
    ...codebook lines...
    [model]
    ...xaFCM lines...

Nothing time-dependent is written, so re-enrolling identical data yields
byte-identical files.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple

from ..core.errors import (
    InvalidSpecError,
    ModelDecodeError,
    ModelStoreError,
    TruncatedStreamError,
    VersionMismatchError,
)
from ..core.files import PathLike, atomic_write_text
from ..quantizer import codebook_from_lines, codebook_to_lines, format_real
from ..signal import FilterSpec
from ..xafcm import format_alpha, model_from_lines, model_to_lines, parse_alpha
from .participant import ParticipantModel

logger = logging.getLogger(__name__)

FILE_FORMAT_VERSION = 1
MODEL_SUFFIX = ".model"
SECTIONS = ("meta", "codebook", "model")

NumberedLine = Tuple[int, str]


def participant_model_to_text(pm: ParticipantModel) -> str:
    """Render a participant model as its file contents."""
    p = pm.params
    meta = [
        f"format={FILE_FORMAT_VERSION}",
        f"participant_id={pm.participant_id}",
        f"k={p.k}",
        f"d={p.d}",
        f"alphabet_size={p.alphabet_size}",
        f"alpha={format_alpha(p.alpha)}",
    ]
    if pm.filter_spec is not None:
        meta += [
            f"sample_rate_hz={format_real(pm.filter_spec.sample_rate_hz)}",
            f"filter_order={pm.filter_spec.order}",
            f"cutoff_hz={format_real(pm.filter_spec.cutoff_hz)}",
        ]
    meta.append("sessions=" + ",".join(f"{s}:{n}" for s, n in pm.provenance))

    lines = ["[meta]", *meta, "[codebook]", *codebook_to_lines(pm.codebook), "[model]"]
    lines += model_to_lines(pm.model)
    return "".join(f"{line}\n" for line in lines)


def _split_sections(text: str) -> Dict[str, List[NumberedLine]]:
    sections: Dict[str, List[NumberedLine]] = {}
    current = None
    for number, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped:
            # the model section is checksummed, so its blank lines are kept
            if current == "model":
                sections[current].append((number, stripped))
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1]
            if current not in SECTIONS:
                raise ModelDecodeError(f"Unknown section [{current}]", line=number)
            if current in sections:
                raise ModelDecodeError(f"Repeated section [{current}]", line=number)
            sections[current] = []
            continue
        if current is None:
            raise ModelDecodeError("Content before the first section header", line=number)
        sections[current].append((number, stripped))
    for name in SECTIONS:
        if name not in sections:
            raise TruncatedStreamError(f"Model file lacks its [{name}] section")
    return sections


def _meta_values(lines: List[NumberedLine]) -> Dict[str, NumberedLine]:
    values = {}
    for number, text in lines:
        key, sep, value = text.partition("=")
        if not sep:
            raise ModelDecodeError(f"Malformed meta line {text!r}", line=number)
        values[key.strip()] = (number, value.strip())
    return values


def participant_model_from_text(text: str) -> ParticipantModel:
    """
    Decode a participant-model file.

    Raises:
        VersionMismatchError: unsupported file or model format version
        TruncatedStreamError: missing sections or trailer lines
        ChecksumError: model section checksum mismatch
        ModelDecodeError: any other malformed content, with its line number
    """
    sections = _split_sections(text)
    meta = _meta_values(sections["meta"])

    def need(key: str) -> NumberedLine:
        if key not in meta:
            raise TruncatedStreamError(f"[meta] lacks '{key}'")
        return meta[key]

    number, raw = need("format")
    if raw != str(FILE_FORMAT_VERSION):
        raise VersionMismatchError(
            f"Unsupported model file format {raw!r} (expected {FILE_FORMAT_VERSION})", line=number
        )
    _, participant_id = need("participant_id")

    codebook = codebook_from_lines(sections["codebook"])
    model = model_from_lines(sections["model"])

    p = model.params
    for key, expected in (("k", p.k), ("d", p.d), ("alphabet_size", p.alphabet_size)):
        number, raw = need(key)
        if raw != str(expected):
            raise ModelDecodeError(f"[meta] {key}={raw} disagrees with the model ({expected})", line=number)
    number, raw = need("alpha")
    try:
        if parse_alpha(raw) != p.alpha:
            raise ModelDecodeError(f"[meta] alpha={raw} disagrees with the model", line=number)
    except InvalidSpecError as e:
        raise ModelDecodeError(f"Bad alpha {raw!r}", line=number) from e

    filter_spec = None
    if "sample_rate_hz" in meta:
        number = meta["sample_rate_hz"][0]
        try:
            filter_spec = FilterSpec(
                sample_rate_hz=float(meta["sample_rate_hz"][1]),
                order=int(need("filter_order")[1]),
                cutoff_hz=float(need("cutoff_hz")[1]),
            )
        except (ValueError, InvalidSpecError) as e:
            raise ModelDecodeError(f"Bad filter parameters: {e}", line=number) from e

    provenance = []
    number, raw = need("sessions")
    for item in filter(None, raw.split(",")):
        session, sep, count = item.rpartition(":")
        try:
            provenance.append((session, int(count)))
        except ValueError as e:
            raise ModelDecodeError(f"Bad session entry {item!r}", line=number) from e
        if not sep:
            raise ModelDecodeError(f"Bad session entry {item!r}", line=number)

    try:
        return ParticipantModel(
            participant_id=participant_id,
            codebook=codebook,
            model=model,
            provenance=tuple(provenance),
            filter_spec=filter_spec,
        )
    except InvalidSpecError as e:
        raise ModelDecodeError(str(e)) from e


def write_model_file(path: PathLike, pm: ParticipantModel) -> Path:
    """Write a participant model atomically."""
    return atomic_write_text(path, participant_model_to_text(pm))


def read_model_file(path: PathLike) -> ParticipantModel:
    """
    Read a participant model file.

    Raises:
        ModelStoreError: the file cannot be read
        ModelDecodeError: the file is corrupt
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ModelStoreError(f"Cannot read model file {path}: {e}") from e
    try:
        return participant_model_from_text(text)
    except ModelDecodeError as e:
        logger.error(f"Corrupt model file {path}: {e}")
        raise
