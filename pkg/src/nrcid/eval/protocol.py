"""
Session-holdout evaluation.

Each participant is enrolled on the training sessions; the held-out session
is cut into fixed-length segments and every segment is identified against
the whole registry.
"""

import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ..core.errors import InvalidDatasetError, InvalidInputError, InvalidSpecError
from ..identity import IdentificationResult, ParticipantModel, Registry, enroll, identify
from ..quantizer import Codebook, QuantizerSpec
from ..signal import FilterSpec, RawRecording, common_sample_rate, segment
from ..xafcm import ModelParams
from .metrics import ClassMetrics, ConfusionMatrix, metrics

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class EvalProtocol:
    """Which sessions train, which session tests, and every pipeline parameter."""

    train_sessions: Tuple[str, ...]
    test_session: str
    params: ModelParams
    filter: FilterSpec
    qspec: QuantizerSpec = field(default_factory=QuantizerSpec)
    segment_seconds: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "train_sessions", tuple(self.train_sessions))
        if not self.train_sessions:
            raise InvalidSpecError("Protocol needs at least one training session")
        if len(set(self.train_sessions)) != len(self.train_sessions):
            raise InvalidSpecError(f"Repeated training session in {self.train_sessions}")
        if self.test_session in self.train_sessions:
            raise InvalidSpecError(
                f"Test session {self.test_session!r} is also a training session"
            )
        if not self.segment_seconds > 0:
            raise InvalidSpecError(f"segment_seconds must be positive, got {self.segment_seconds}")
        if self.qspec.alphabet_size != self.params.alphabet_size:
            raise InvalidSpecError(
                f"Quantizer alphabet {self.qspec.alphabet_size} differs from model alphabet "
                f"{self.params.alphabet_size}"
            )


@dataclass(frozen=True)
class SegmentOutcome:
    true_id: str
    result: IdentificationResult

    @property
    def correct(self) -> bool:
        return self.result.predicted == self.true_id


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    macro_f1: float
    micro_f1: float
    per_class: Dict[str, ClassMetrics]
    per_segment: Tuple[SegmentOutcome, ...]
    failed_enrollments: Dict[str, str]
    protocol: EvalProtocol

    @property
    def segments(self) -> int:
        return len(self.per_segment)

    def summary(self) -> str:
        return (
            f"accuracy={self.accuracy:.4f} macro_f1={self.macro_f1:.4f} "
            f"segments={self.segments} participants={len(self.confusion.labels)}"
        )


def _map(executor: Optional[Executor], fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    if executor is None:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))


def index_sessions(dataset: Iterable[RawRecording]) -> Dict[str, Dict[str, RawRecording]]:
    """participant -> session -> recording, rejecting duplicate pairs."""
    by_participant: Dict[str, Dict[str, RawRecording]] = {}
    for recording in dataset:
        sessions = by_participant.setdefault(recording.participant_id, {})
        if recording.session_id in sessions:
            raise InvalidDatasetError(
                f"Duplicate recording {recording.participant_id}/{recording.session_id}"
            )
        sessions[recording.session_id] = recording
    return by_participant


def check_dataset(
    dataset: Sequence[RawRecording], protocol: EvalProtocol
) -> Dict[str, Dict[str, RawRecording]]:
    """
    Validate a dataset against a protocol.

    Raises:
        InvalidDatasetError: empty dataset, mixed or mismatched rates, missing sessions
    """
    if not dataset:
        raise InvalidDatasetError("Dataset holds no recordings")
    rate = common_sample_rate(dataset)
    if rate != protocol.filter.sample_rate_hz:
        raise InvalidDatasetError(
            f"Dataset is sampled at {rate:g} Hz but the protocol filter expects "
            f"{protocol.filter.sample_rate_hz:g} Hz"
        )
    by_participant = index_sessions(dataset)
    needed = (*protocol.train_sessions, protocol.test_session)
    missing = [
        f"{pid}/{session}"
        for pid in sorted(by_participant)
        for session in needed
        if session not in by_participant[pid]
    ]
    if missing:
        raise InvalidDatasetError(f"Missing sessions: {', '.join(missing)}")
    return by_participant


def evaluate(
    dataset: Sequence[RawRecording],
    protocol: EvalProtocol,
    executor: Optional[Executor] = None,
    codebooks: Optional[Mapping[str, Codebook]] = None,
) -> EvalReport:
    """
    Run the session-holdout protocol.

    Participants whose enrollment fails (too little or degenerate training
    data) are logged, excluded from the registry and listed in
    `failed_enrollments`; their test segments are not scored.

    Args:
        dataset: All recordings (every participant, every session)
        protocol: Sessions and pipeline parameters
        executor: Optional executor; enrollment and segment scoring fan out over it
        codebooks: Precomputed codebooks per participant (reused across sweep cells)

    Returns:
        EvalReport with results reduced in participant-id then segment order

    Raises:
        InvalidDatasetError: missing sessions, mixed rates, nobody enrollable,
            or no complete test segment
    """
    dataset = list(dataset)
    by_participant = check_dataset(dataset, protocol)
    participants = sorted(by_participant)
    codebooks = codebooks or {}

    def enroll_one(pid: str):
        try:
            return enroll(
                pid,
                [by_participant[pid][s] for s in protocol.train_sessions],
                protocol.params,
                protocol.filter,
                protocol.qspec,
                codebook=codebooks.get(pid),
            )
        except InvalidInputError as e:
            return e

    enrolled: List[ParticipantModel] = []
    failed: Dict[str, str] = {}
    for pid, outcome in zip(participants, _map(executor, enroll_one, participants)):
        if isinstance(outcome, ParticipantModel):
            enrolled.append(outcome)
        else:
            failed[pid] = str(outcome)
            logger.warning(f"[evaluate] enrollment failed for {pid}: {outcome}")
    if not enrolled:
        raise InvalidDatasetError("No participant could be enrolled")

    registry = Registry(enrolled)
    rate = protocol.filter.sample_rate_hz
    tests: List[Tuple[str, np.ndarray]] = []
    for pid in registry.participant_ids:
        recording = by_participant[pid][protocol.test_session]
        for piece in segment(recording.samples, protocol.segment_seconds, rate):
            tests.append((pid, piece))
    if not tests:
        raise InvalidDatasetError(
            f"Test session {protocol.test_session!r} is shorter than one "
            f"{protocol.segment_seconds:g} s segment for every participant"
        )

    results = _map(executor, lambda test: identify(registry, test[1], protocol.filter), tests)
    per_segment = tuple(SegmentOutcome(true_id=pid, result=r) for (pid, _), r in zip(tests, results))

    confusion = ConfusionMatrix.from_predictions(
        registry.participant_ids,
        [o.true_id for o in per_segment],
        [o.result.predicted for o in per_segment],
    )
    m = metrics(confusion)
    report = EvalReport(
        confusion=confusion,
        accuracy=m.accuracy,
        macro_f1=m.macro_f1,
        micro_f1=m.micro_f1,
        per_class=m.per_class,
        per_segment=per_segment,
        failed_enrollments=failed,
        protocol=protocol,
    )
    logger.info(
        f"[evaluate] k={protocol.params.k} d={protocol.params.d} "
        f"L={protocol.params.alphabet_size}: {report.summary()}"
    )
    return report
