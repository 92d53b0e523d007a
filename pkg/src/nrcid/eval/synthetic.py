"""
Seeded synthetic ECG-like recordings for desk-scale evaluation.

Each participant is a sum of sinusoids at harmonics of a personal base
period, with a personal amplitude vector, plus Gaussian noise. By default the
noise is baseline wander: white noise low-passed at `noise_cutoff_hz`, then
scaled so its RMS is exactly `noise_std`. Setting `noise_cutoff_hz` to None
adds white noise instead. Every (participant, session) pair draws its noise
from its own generator seeded with (seed, participant index, session index),
so recordings do not depend on generation order.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
import yaml
from scipy import signal as sps

from ..core.errors import InvalidDatasetError, InvalidSpecError
from ..core.files import atomic_write_text
from ..signal import RawRecording

logger = logging.getLogger(__name__)

SESSION_PREFIX = "day"
DEFAULT_HARMONICS = 6

DEFAULT_NOISE_CUTOFF_HZ = 0.2
NOISE_FILTER_ORDER = 4
NOISE_SETTLE_SECONDS = 10.0


@dataclass(frozen=True)
class ParticipantSignature:
    """Generator parameters for one synthetic participant."""

    participant_id: str
    base_period_s: float
    harmonics: Tuple[float, ...]
    noise_std: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "harmonics", tuple(float(a) for a in self.harmonics))
        if not self.participant_id:
            raise InvalidSpecError("participant_id must be non-empty")
        if not (self.base_period_s > 0 and math.isfinite(self.base_period_s)):
            raise InvalidSpecError(
                f"{self.participant_id}: base period must be positive, got {self.base_period_s}"
            )
        if not self.harmonics:
            raise InvalidSpecError(f"{self.participant_id}: harmonic amplitude vector is empty")
        if not all(math.isfinite(a) for a in self.harmonics):
            raise InvalidSpecError(f"{self.participant_id}: harmonic amplitudes must be finite")
        if not (self.noise_std >= 0 and math.isfinite(self.noise_std)):
            raise InvalidSpecError(
                f"{self.participant_id}: noise_std must be >= 0, got {self.noise_std}"
            )

    @property
    def rms(self) -> float:
        """RMS of the noiseless waveform."""
        return math.sqrt(sum(a * a for a in self.harmonics) / 2.0)


@dataclass(frozen=True)
class SyntheticSpec:
    participants: Tuple[ParticipantSignature, ...]
    sessions: int = 3
    duration_seconds: float = 60.0
    sample_rate_hz: float = 1000.0
    seed: int = 0
    noise_cutoff_hz: Optional[float] = DEFAULT_NOISE_CUTOFF_HZ

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(self.participants))
        if not self.participants:
            raise InvalidSpecError("Synthetic spec lists no participants")
        ids = [p.participant_id for p in self.participants]
        if len(set(ids)) != len(ids):
            raise InvalidSpecError(f"Duplicate synthetic participant ids: {ids}")
        if int(self.sessions) != self.sessions or self.sessions < 1:
            raise InvalidSpecError(f"sessions must be a positive integer, got {self.sessions}")
        if not self.sample_rate_hz > 0:
            raise InvalidSpecError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if self.noise_cutoff_hz is not None and not (
            0 < self.noise_cutoff_hz < self.sample_rate_hz / 2.0
        ):
            raise InvalidSpecError(
                f"noise_cutoff_hz must lie in (0, {self.sample_rate_hz / 2.0:g}), "
                f"got {self.noise_cutoff_hz}"
            )
        if self.samples_per_session < 2:
            raise InvalidSpecError(
                f"{self.duration_seconds} s at {self.sample_rate_hz} Hz gives fewer than 2 samples"
            )

    @property
    def samples_per_session(self) -> int:
        return int(math.floor(self.duration_seconds * self.sample_rate_hz + 1e-9))

    @property
    def session_ids(self) -> List[str]:
        return [f"{SESSION_PREFIX}{i + 1}" for i in range(self.sessions)]


def unit_noise(
    rng: np.random.Generator, n: int, sample_rate_hz: float, cutoff_hz: Optional[float]
) -> np.ndarray:
    """
    n samples of zero-mean noise with unit RMS.

    With a cutoff, white noise runs through an order-4 Butterworth low-pass
    after a settling lead-in that is discarded.
    """
    if cutoff_hz is None:
        return rng.standard_normal(n)
    lead = int(math.ceil(NOISE_SETTLE_SECONDS * sample_rate_hz))
    sos = sps.butter(NOISE_FILTER_ORDER, cutoff_hz, btype="low", output="sos", fs=sample_rate_hz)
    wander = sps.sosfilt(sos, rng.standard_normal(lead + n))[lead:]
    wander = wander - wander.mean()
    return wander / math.sqrt(float(np.mean(np.square(wander))))


def generate_synthetic(spec: SyntheticSpec) -> List[RawRecording]:
    """
    Generate every (participant, session) recording of a spec.

    Returns:
        Recordings ordered by participant (spec order) then session
    """
    n = spec.samples_per_session
    t = np.arange(n, dtype=np.float64) / spec.sample_rate_hz
    recordings = []
    for p_index, sig in enumerate(spec.participants):
        clean = np.zeros(n, dtype=np.float64)
        for h, amplitude in enumerate(sig.harmonics, start=1):
            clean += amplitude * np.sin(2.0 * np.pi * h * t / sig.base_period_s)
        for s_index, session_id in enumerate(spec.session_ids):
            samples = clean.copy()
            if sig.noise_std > 0:
                rng = np.random.default_rng([spec.seed, p_index, s_index])
                samples += sig.noise_std * unit_noise(rng, n, spec.sample_rate_hz, spec.noise_cutoff_hz)
            recordings.append(
                RawRecording(
                    participant_id=sig.participant_id,
                    session_id=session_id,
                    sample_rate_hz=spec.sample_rate_hz,
                    samples=samples,
                )
            )
    logger.info(
        f"[generate_synthetic] participants={len(spec.participants)} "
        f"sessions={spec.sessions} samples/session={n}"
    )
    return recordings


def noise_std_for_snr(rms: float, snr_db: float) -> float:
    """Noise standard deviation giving the requested signal-to-noise ratio."""
    return rms / (10.0 ** (snr_db / 20.0))


def default_synthetic_spec(
    participants: int = 5,
    sessions: int = 3,
    duration_seconds: float = 60.0,
    sample_rate_hz: float = 1000.0,
    snr_db: float = 10.0,
    seed: int = 7,
    noise_cutoff_hz: Optional[float] = DEFAULT_NOISE_CUTOFF_HZ,
) -> SyntheticSpec:
    """
    The standard synthetic cohort.

    Base periods are spread evenly over 0.7-1.2 s. Amplitude vectors are drawn
    from a generator seeded with `seed`: a per-participant gain, a decay
    exponent over the harmonics and a random weight per harmonic. Noise is set
    so every participant sits at `snr_db`, measured against the noise's full
    RMS. The default noise is baseline wander below `noise_cutoff_hz`.
    """
    if participants < 1:
        raise InvalidSpecError(f"participants must be >= 1, got {participants}")
    rng = np.random.default_rng(seed)
    periods = np.linspace(0.7, 1.2, participants) if participants > 1 else np.array([0.9])
    order = np.arange(1, DEFAULT_HARMONICS + 1, dtype=np.float64)
    width = len(str(participants))

    signatures = []
    for i, period in enumerate(periods):
        gain = rng.uniform(0.6, 1.6)
        decay = rng.uniform(0.5, 1.5)
        weights = rng.uniform(0.2, 1.0, size=DEFAULT_HARMONICS)
        amplitudes = np.round(gain * weights / order**decay, 6)
        rms = math.sqrt(float(np.sum(amplitudes**2)) / 2.0)
        signatures.append(
            ParticipantSignature(
                participant_id=f"p{i + 1:0{width}d}",
                base_period_s=round(float(period), 6),
                harmonics=tuple(float(a) for a in amplitudes),
                noise_std=round(noise_std_for_snr(rms, snr_db), 9),
            )
        )
    return SyntheticSpec(
        participants=tuple(signatures),
        sessions=sessions,
        duration_seconds=duration_seconds,
        sample_rate_hz=sample_rate_hz,
        seed=seed,
        noise_cutoff_hz=noise_cutoff_hz,
    )


# =============================================================================
# YAML codec
# =============================================================================


def synthetic_spec_to_dict(spec: SyntheticSpec) -> Dict[str, Any]:
    return {
        "seed": spec.seed,
        "sessions": spec.sessions,
        "duration_seconds": float(spec.duration_seconds),
        "sample_rate_hz": float(spec.sample_rate_hz),
        "noise_cutoff_hz": None if spec.noise_cutoff_hz is None else float(spec.noise_cutoff_hz),
        "participants": [
            {
                "id": p.participant_id,
                "base_period_s": float(p.base_period_s),
                "harmonics": [float(a) for a in p.harmonics],
                "noise_std": float(p.noise_std),
            }
            for p in spec.participants
        ],
    }


def synthetic_spec_from_dict(data: Mapping[str, Any]) -> SyntheticSpec:
    """
    Build a SyntheticSpec from parsed YAML.

    `participants` may be a list of signatures or, as a shorthand, an integer
    count, in which case the standard cohort is generated (with optional
    `snr_db`).

    Raises:
        InvalidSpecError: missing or malformed fields
    """
    if not isinstance(data, Mapping):
        raise InvalidSpecError("Synthetic spec must be a mapping")
    try:
        seed = int(data.get("seed", 0))
        sessions = int(data.get("sessions", 3))
        duration = float(data.get("duration_seconds", 60.0))
        rate = float(data.get("sample_rate_hz", 1000.0))
        cutoff = data.get("noise_cutoff_hz", DEFAULT_NOISE_CUTOFF_HZ)
        noise_cutoff = None if cutoff is None else float(cutoff)
        participants = data.get("participants")
        if isinstance(participants, int) and not isinstance(participants, bool):
            return default_synthetic_spec(
                participants=participants,
                sessions=sessions,
                duration_seconds=duration,
                sample_rate_hz=rate,
                snr_db=float(data.get("snr_db", 10.0)),
                seed=seed,
                noise_cutoff_hz=noise_cutoff,
            )
        if not participants:
            raise InvalidSpecError("Synthetic spec lists no participants")
        signatures = tuple(
            ParticipantSignature(
                participant_id=str(p["id"]),
                base_period_s=float(p["base_period_s"]),
                harmonics=tuple(float(a) for a in p["harmonics"]),
                noise_std=float(p.get("noise_std", 0.0)),
            )
            for p in participants
        )
    except InvalidSpecError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidSpecError(f"Malformed synthetic spec: {e!r}") from e
    return SyntheticSpec(
        participants=signatures,
        sessions=sessions,
        duration_seconds=duration,
        sample_rate_hz=rate,
        seed=seed,
        noise_cutoff_hz=noise_cutoff,
    )


def dump_synthetic_spec(spec: SyntheticSpec) -> str:
    return yaml.safe_dump(synthetic_spec_to_dict(spec), sort_keys=False)


def load_synthetic_spec(source: Union[str, Path]) -> SyntheticSpec:
    """
    Read a SyntheticSpec YAML file.

    Raises:
        InvalidDatasetError: the file cannot be read or parsed
        InvalidSpecError: the contents are not a valid spec
    """
    path = Path(source)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InvalidDatasetError(f"Cannot read synthetic spec {path}: {e}") from e
    except yaml.YAMLError as e:
        raise InvalidSpecError(f"Synthetic spec {path} is not valid YAML: {e}") from e
    if data is None:
        raise InvalidSpecError(f"Synthetic spec {path} is empty")
    return synthetic_spec_from_dict(data)


def save_synthetic_spec(path: Union[str, Path], spec: SyntheticSpec) -> Path:
    return atomic_write_text(path, dump_synthetic_spec(spec))
