"""
Recording ingestion and the on-disk dataset layout.

A recording file is CSV with one real-valued sample per line and an optional
first line `# participant=<id> session=<id> rate_hz=<real>`.

A dataset directory is laid out as:

    <root>/manifest.txt              rate_hz=<real>
    <root>/<participant>/<session>.csv
"""

import io
import logging
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from ..core.errors import InvalidDatasetError, InvalidInputError
from ..core.files import PathLike, atomic_write_text

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"
RECORDING_SUFFIX = ".csv"

_HEADER_FIELD = re.compile(r"(\w+)=(\S+)")


@dataclass(frozen=True, eq=False)
class RawRecording:
    """One session of real-valued samples for one participant."""

    participant_id: str
    session_id: str
    sample_rate_hz: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidInputError(f"Samples must be 1-D, got shape {samples.shape}")
        if not self.sample_rate_hz > 0:
            raise InvalidInputError(
                f"sample_rate_hz must be positive, got {self.sample_rate_hz}"
            )
        if samples.size < 2:
            raise InvalidInputError(
                f"Recording {self.participant_id}/{self.session_id} needs at least 2 samples, "
                f"got {samples.size}"
            )
        object.__setattr__(self, "samples", samples)

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate_hz


# =============================================================================
# Recording CSV codec
# =============================================================================


def _parse_header(line: str) -> Dict[str, str]:
    return dict(_HEADER_FIELD.findall(line.lstrip("#")))


def _parse_samples(path: Path, text: str) -> np.ndarray:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return np.loadtxt(io.StringIO(text), comments="#", dtype=np.float64, ndmin=1)
    except ValueError as e:
        raise InvalidDatasetError(f"{path}: cannot parse samples: {e}") from e


def read_recording(
    path: PathLike,
    participant_id: Optional[str] = None,
    session_id: Optional[str] = None,
    sample_rate_hz: Optional[float] = None,
) -> RawRecording:
    """
    Read a recording CSV.

    Header values are used when present; explicit arguments fill in what the
    header lacks and must agree with it otherwise.

    Args:
        path: CSV file path
        participant_id: Participant id when the file has no header
        session_id: Session id when the file has no header (default: file stem)
        sample_rate_hz: Sample rate when the file has no header

    Returns:
        RawRecording

    Raises:
        InvalidDatasetError: missing metadata, conflicting metadata or unparsable samples
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidDatasetError(f"Cannot read recording {path}: {e}") from e

    first = text.split("\n", 1)[0]
    header = _parse_header(first) if first.startswith("#") else {}

    def pick(key: str, given, convert=str):
        in_header = header.get(key)
        if in_header is not None:
            value = convert(in_header)
            if given is not None and convert(given) != value:
                raise InvalidDatasetError(
                    f"{path}: header {key}={in_header} conflicts with expected {given}"
                )
            return value
        return None if given is None else convert(given)

    try:
        participant = pick("participant", participant_id)
        session = pick("session", session_id) or path.stem
        rate = pick("rate_hz", sample_rate_hz, float)
    except ValueError as e:
        raise InvalidDatasetError(f"{path}: malformed header: {e}") from e

    if participant is None or rate is None:
        raise InvalidDatasetError(
            f"{path}: participant id and sample rate must come from the header or the caller"
        )

    samples = _parse_samples(path, text)

    try:
        return RawRecording(
            participant_id=participant,
            session_id=session,
            sample_rate_hz=rate,
            samples=samples,
        )
    except InvalidInputError as e:
        raise InvalidDatasetError(f"{path}: {e}") from e


def read_segment(path: PathLike) -> Tuple[np.ndarray, Optional[float]]:
    """
    Read a bare segment file for identification.

    Returns:
        (samples, rate_hz from the header or None)

    Raises:
        InvalidDatasetError: unreadable file, bad header rate or unparsable samples
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidDatasetError(f"Cannot read segment {path}: {e}") from e
    first = text.split("\n", 1)[0]
    header = _parse_header(first) if first.startswith("#") else {}
    rate = None
    if "rate_hz" in header:
        try:
            rate = float(header["rate_hz"])
        except ValueError as e:
            raise InvalidDatasetError(f"{path}: bad rate_hz {header['rate_hz']!r}") from e
    return _parse_samples(path, text), rate


def format_recording(recording: RawRecording) -> str:
    """Render a recording as CSV text with its metadata header."""
    buf = io.StringIO()
    header = (
        f"participant={recording.participant_id} session={recording.session_id} "
        f"rate_hz={recording.sample_rate_hz!r}"
    )
    np.savetxt(buf, recording.samples, fmt="%.17g", header=header, comments="# ", newline="\n")
    return buf.getvalue()


def write_recording(path: PathLike, recording: RawRecording) -> Path:
    """Write a recording CSV atomically."""
    return atomic_write_text(path, format_recording(recording))


# =============================================================================
# Dataset directory layout
# =============================================================================


@dataclass(frozen=True)
class Manifest:
    """Dataset root description: sample rate plus the inventory found on disk."""

    root: Path
    rate_hz: float
    inventory: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def participants(self) -> List[str]:
        return sorted(self.inventory)

    def path_for(self, participant_id: str, session_id: str) -> Path:
        return self.root / participant_id / f"{session_id}{RECORDING_SUFFIX}"


def read_manifest_rate(root: PathLike) -> float:
    """Read `rate_hz=<real>` from a dataset root's manifest file."""
    path = Path(root) / MANIFEST_NAME
    if not path.is_file():
        raise InvalidDatasetError(f"Dataset root {root} has no {MANIFEST_NAME}")
    for line in path.read_text(encoding="utf-8").splitlines():
        key, _, value = line.strip().partition("=")
        if key.strip() == "rate_hz":
            try:
                rate = float(value)
            except ValueError as e:
                raise InvalidDatasetError(f"{path}: bad rate_hz value {value!r}") from e
            if not rate > 0:
                raise InvalidDatasetError(f"{path}: rate_hz must be positive, got {rate}")
            return rate
    raise InvalidDatasetError(f"{path}: missing rate_hz entry")


def discover_dataset(root: PathLike) -> Manifest:
    """
    Inventory a dataset root.

    Raises:
        InvalidDatasetError: missing root or manifest, or no recordings found
    """
    root = Path(root)
    if not root.is_dir():
        raise InvalidDatasetError(f"Dataset root {root} does not exist or is not a directory")
    rate = read_manifest_rate(root)

    inventory: Dict[str, List[str]] = {}
    for participant_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        sessions = sorted(f.stem for f in participant_dir.glob(f"*{RECORDING_SUFFIX}"))
        if sessions:
            inventory[participant_dir.name] = sessions

    if not inventory:
        raise InvalidDatasetError(f"Dataset root {root} contains no recordings")
    logger.info(
        f"[discover_dataset] {root}: {len(inventory)} participants, rate {rate:g} Hz"
    )
    return Manifest(root=root, rate_hz=rate, inventory=inventory)


def load_dataset(root: Union[PathLike, Manifest]) -> List[RawRecording]:
    """Load every recording listed by a dataset manifest, ordered by participant then session."""
    manifest = root if isinstance(root, Manifest) else discover_dataset(root)
    recordings = []
    for participant in manifest.participants:
        for session in manifest.inventory[participant]:
            recordings.append(
                read_recording(
                    manifest.path_for(participant, session),
                    participant_id=participant,
                    session_id=session,
                    sample_rate_hz=manifest.rate_hz,
                )
            )
    return recordings


def write_dataset(root: PathLike, recordings: Iterable[RawRecording]) -> Manifest:
    """
    Write recordings in the dataset layout.

    Raises:
        InvalidDatasetError: no recordings, or recordings at different sample rates
    """
    root = Path(root)
    recordings = list(recordings)
    if not recordings:
        raise InvalidDatasetError("No recordings to write")
    rates = {r.sample_rate_hz for r in recordings}
    if len(rates) != 1:
        raise InvalidDatasetError(f"Recordings have mixed sample rates: {sorted(rates)}")
    rate = rates.pop()

    inventory: Dict[str, List[str]] = {}
    for recording in recordings:
        path = root / recording.participant_id / f"{recording.session_id}{RECORDING_SUFFIX}"
        write_recording(path, recording)
        inventory.setdefault(recording.participant_id, []).append(recording.session_id)
    atomic_write_text(root / MANIFEST_NAME, f"rate_hz={rate!r}\n")

    logger.info(f"[write_dataset] {root}: {len(recordings)} recordings")
    return Manifest(
        root=root, rate_hz=rate, inventory={p: sorted(s) for p, s in inventory.items()}
    )


def common_sample_rate(recordings: Iterable[RawRecording]) -> float:
    """
    Return the single sample rate shared by all recordings.

    Raises:
        InvalidDatasetError: if the recordings are empty or rates differ
    """
    rates = sorted({r.sample_rate_hz for r in recordings})
    if not rates:
        raise InvalidDatasetError("No recordings given")
    if len(rates) > 1:
        raise InvalidDatasetError(
            f"Recordings have mixed sample rates {rates}; resampling is not supported"
        )
    return rates[0]
