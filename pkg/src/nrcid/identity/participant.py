"""
Enrollment and NRC scoring for one participant.

Enrollment runs filter -> derivative per session, concatenates the sessions,
learns a Lloyd-Max codebook on the concatenation, quantizes it with that
codebook and learns an xaFCM from the symbols. Scoring quantizes a test
segment with the candidate's own codebook and normalizes the model's bit
estimate by coded_symbols * log2 |A|.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..core.errors import InvalidDatasetError, InvalidInputError, InvalidSpecError
from ..quantizer import Codebook, QuantizerSpec, quantize, train_lloyd_max
from ..signal import FilterSpec, RawRecording, common_sample_rate, preprocess
from ..xafcm import ModelParams, XaModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ParticipantModel:
    """Enrollment artifact: identity label, codebook and frozen xaFCM."""

    participant_id: str
    codebook: Codebook
    model: XaModel
    provenance: Tuple[Tuple[str, int], ...] = ()
    filter_spec: Optional[FilterSpec] = None

    def __post_init__(self):
        if self.codebook.alphabet_size != self.model.params.alphabet_size:
            raise InvalidSpecError(
                f"Codebook has {self.codebook.alphabet_size} levels but the model alphabet "
                f"has {self.model.params.alphabet_size} symbols"
            )
        if not self.model.frozen:
            self.model.freeze()

    @property
    def params(self) -> ModelParams:
        return self.model.params

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParticipantModel):
            return NotImplemented
        return (
            self.participant_id == other.participant_id
            and self.codebook == other.codebook
            and self.model == other.model
            and self.provenance == other.provenance
            and self.filter_spec == other.filter_spec
        )

    __hash__ = None


@dataclass(frozen=True)
class NrcScore:
    """Normalized relative compression of one segment under one model."""

    nrc: float
    coded_symbols: int


def _training_derivatives(
    recordings: Sequence[RawRecording], filter_spec: FilterSpec
) -> Tuple[np.ndarray, Tuple[Tuple[str, int], ...]]:
    if not recordings:
        raise InvalidDatasetError("Enrollment needs at least one training recording")
    rate = common_sample_rate(recordings)
    if rate != filter_spec.sample_rate_hz:
        raise InvalidDatasetError(
            f"Recordings are sampled at {rate:g} Hz but the filter was designed for "
            f"{filter_spec.sample_rate_hz:g} Hz"
        )
    pieces = []
    provenance = []
    for recording in recordings:
        values = preprocess(recording.samples, filter_spec).values
        pieces.append(values)
        provenance.append((recording.session_id, int(values.size)))
    return np.concatenate(pieces), tuple(provenance)


def train_codebook(
    recordings: Sequence[RawRecording], filter_spec: FilterSpec, qspec: QuantizerSpec
) -> Codebook:
    """First enrollment pass: a Lloyd-Max codebook over all training derivatives."""
    derivatives, _ = _training_derivatives(recordings, filter_spec)
    return train_lloyd_max(derivatives, qspec)


def enroll(
    participant_id: str,
    recordings: Sequence[RawRecording],
    params: ModelParams,
    filter_spec: FilterSpec,
    qspec: QuantizerSpec,
    codebook: Optional[Codebook] = None,
) -> ParticipantModel:
    """
    Build a participant model from training recordings.

    Args:
        participant_id: Identity label
        recordings: Training sessions, concatenated in the given order
        params: xaFCM parameters
        filter_spec: Low-pass filter applied to every session
        qspec: Quantizer parameters
        codebook: Previously trained codebook for the same recordings (skips the first pass)

    Returns:
        A ParticipantModel with a frozen xaFCM

    Raises:
        InvalidDatasetError: no recordings, mixed or mismatched sample rates
        InvalidSpecError: alphabet sizes disagree
        InvalidInputError: too little training data
        DegenerateDataError: fewer distinct derivative values than cells
    """
    if qspec.alphabet_size != params.alphabet_size:
        raise InvalidSpecError(
            f"Quantizer alphabet {qspec.alphabet_size} differs from model alphabet "
            f"{params.alphabet_size}"
        )
    derivatives, provenance = _training_derivatives(recordings, filter_spec)
    if derivatives.size < max(params.k, params.d):
        raise InvalidInputError(
            f"{participant_id}: {derivatives.size} derivative samples are fewer than "
            f"max(k, d) = {max(params.k, params.d)}"
        )
    if codebook is None:
        codebook = train_lloyd_max(derivatives, qspec)
    symbols = quantize(codebook, derivatives)
    model = XaModel(params).learn(symbols).freeze()

    logger.info(
        f"[enroll] {participant_id}: sessions={[s for s, _ in provenance]} "
        f"symbols={len(symbols)} contexts={model.counts.context_count}"
    )
    return ParticipantModel(
        participant_id=participant_id,
        codebook=codebook,
        model=model,
        provenance=provenance,
        filter_spec=filter_spec,
    )


def nrc(pm: ParticipantModel, segment: Sequence[float], filter_spec: FilterSpec) -> NrcScore:
    """
    Normalized relative compression of a raw segment under a participant model.

    The segment is filtered, differentiated and quantized with the model's own
    codebook; the xaFCM bit estimate is divided by coded_symbols * log2 |A|.

    Raises:
        InvalidInputError: segment too short for the filter or the model
    """
    derivatives = preprocess(segment, filter_spec).values
    params = pm.params
    if derivatives.size < max(params.k, params.d):
        raise InvalidInputError(
            f"Segment yields {derivatives.size} symbols, fewer than max(k, d) = "
            f"{max(params.k, params.d)}"
        )
    symbols = quantize(pm.codebook, derivatives)
    result = pm.model.compress_bits(symbols)
    value = result.bits / (result.coded_symbols * math.log2(params.alphabet_size))
    return NrcScore(nrc=value, coded_symbols=result.coded_symbols)
