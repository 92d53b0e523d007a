"""
Versioned text codec for xaFCM models.

    xafcm v1
    k=<int> d=<int> alphabet=<symbols> alpha=<auto|real>
    <context>:<event>=<count>,<event>=<count>,...     (one line per context)
    contexts=<number of context lines>
    checksum=<crc32 of every preceding line, 8 hex digits>

Contexts and events are sorted so identical models serialize to identical bytes.
"""

import re
import zlib
from typing import List, Sequence, Tuple

from ..core.errors import (
    ChecksumError,
    InvalidSpecError,
    ModelDecodeError,
    TruncatedStreamError,
    VersionMismatchError,
)
from .model import CountsTable, ModelParams, XaModel, format_alpha

FORMAT_NAME = "xafcm"
FORMAT_VERSION = 1

_VERSION_LINE = re.compile(r"^xafcm v(\d+)$")
_PARAM_FIELD = re.compile(r"(\w+)=(\S+)")

NumberedLine = Tuple[int, str]


def _checksum(lines: Sequence[str]) -> str:
    payload = "".join(f"{line}\n" for line in lines).encode("utf-8")
    return f"{zlib.crc32(payload) & 0xFFFFFFFF:08x}"


def model_to_lines(model: XaModel) -> List[str]:
    """Render a model as text lines (without trailing newlines)."""
    p = model.params
    lines = [
        f"{FORMAT_NAME} v{FORMAT_VERSION}",
        f"k={p.k} d={p.d} alphabet={p.symbols} alpha={format_alpha(p.alpha)}",
    ]
    for context, events in model.counts.items():
        body = ",".join(f"{event}={events[event]}" for event in sorted(events))
        lines.append(f"{context}:{body}")
    lines.append(f"contexts={model.counts.context_count}")
    lines.append(f"checksum={_checksum(lines)}")
    return lines


def serialize(model: XaModel) -> bytes:
    """Encode a model as UTF-8 text with LF line endings."""
    return "".join(f"{line}\n" for line in model_to_lines(model)).encode("utf-8")


def _parse_params(number: int, text: str) -> ModelParams:
    fields = dict(_PARAM_FIELD.findall(text))
    missing = [key for key in ("k", "d", "alphabet", "alpha") if key not in fields]
    if missing:
        raise ModelDecodeError(f"Parameter line lacks {', '.join(missing)}", line=number)
    symbols = fields["alphabet"]
    try:
        params = ModelParams(
            k=int(fields["k"]),
            d=int(fields["d"]),
            alphabet_size=len(symbols),
            alpha=fields["alpha"],
        )
    except (ValueError, InvalidSpecError) as e:
        raise ModelDecodeError(f"Invalid model parameters: {e}", line=number) from e
    if params.symbols != symbols:
        raise ModelDecodeError(f"Unsupported alphabet {symbols!r}", line=number)
    return params


def _parse_context_line(number: int, text: str, params: ModelParams, counts: CountsTable) -> int:
    context, sep, body = text.partition(":")
    if not sep or len(context) != params.k or not body:
        raise ModelDecodeError(f"Malformed context line {text[:40]!r}", line=number)
    symbols = set(params.symbols)
    if set(context) - symbols:
        raise ModelDecodeError(f"Context {context!r} uses symbols outside the alphabet", line=number)
    if counts.total(context):
        raise ModelDecodeError(f"Duplicate context {context!r}", line=number)
    added = 0
    for item in body.split(","):
        event, sep, raw = item.partition("=")
        if not sep or len(event) != params.d or set(event) - symbols:
            raise ModelDecodeError(f"Malformed event entry {item!r}", line=number)
        try:
            value = int(raw)
        except ValueError as e:
            raise ModelDecodeError(f"Bad count {raw!r}", line=number) from e
        if value < 1 or counts.count(context, event):
            raise ModelDecodeError(f"Invalid or repeated count for event {event!r}", line=number)
        counts.increment(context, event, value)
        added += value
    return added


def model_from_lines(lines: Sequence[NumberedLine]) -> XaModel:
    """
    Decode a model from numbered text lines.

    Returns:
        A frozen XaModel

    Raises:
        VersionMismatchError: unsupported format version
        TruncatedStreamError: missing trailer lines or fewer contexts than declared
        ChecksumError: content does not match the checksum line
        ModelDecodeError: any other malformed content (with the offending line)
    """
    lines = list(lines)
    # Blank lines only end the stream; anywhere else they are checksummed content.
    while lines and not lines[-1][1].strip():
        lines.pop()
    if not lines:
        raise TruncatedStreamError("Empty model stream", line=None)

    number, first = lines[0]
    match = _VERSION_LINE.match(first.strip())
    if not match:
        raise ModelDecodeError(f"Not an {FORMAT_NAME} stream: {first[:40]!r}", line=number)
    version = int(match.group(1))
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"Unsupported {FORMAT_NAME} version {version} (expected {FORMAT_VERSION})", line=number
        )

    number, last = lines[-1]
    if not last.startswith("checksum="):
        raise TruncatedStreamError("Model stream ends without a checksum line", line=number)
    if _checksum([text for _, text in lines[:-1]]) != last.partition("=")[2].strip():
        raise ChecksumError("Model checksum does not match its content", line=number)

    if len(lines) < 4:
        raise TruncatedStreamError("Model stream is missing its parameter or trailer lines", line=number)
    params = _parse_params(*lines[1])

    number, trailer = lines[-2]
    key, sep, raw = trailer.partition("=")
    if key != "contexts" or not sep:
        raise TruncatedStreamError("Model stream lacks its contexts trailer", line=number)
    try:
        declared = int(raw)
    except ValueError as e:
        raise ModelDecodeError(f"Bad context count {raw!r}", line=number) from e

    body = lines[2:-2]
    if declared != len(body):
        error = TruncatedStreamError if declared > len(body) else ModelDecodeError
        raise error(f"Declared {declared} contexts, found {len(body)}", line=number)

    counts = CountsTable()
    trained = 0
    for number, text in body:
        trained += _parse_context_line(number, text, params, counts)
    return XaModel(params, counts=counts, trained_symbols=trained).freeze()


def deserialize(data: bytes) -> XaModel:
    """Decode bytes produced by serialize()."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ModelDecodeError(f"Model stream is not UTF-8: {e}") from e
    return model_from_lines(list(enumerate(text.split("\n"), start=1)))
