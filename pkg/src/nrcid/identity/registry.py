"""
Closed-set identification across a registry of enrolled participants.
"""

import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..core.errors import InvalidSpecError, InvalidStateError
from ..signal import FilterSpec
from ..xafcm import ModelParams
from .participant import NrcScore, ParticipantModel, nrc
from .store import ModelStore

logger = logging.getLogger(__name__)


class Registry:
    """Immutable set of participant models that share one parameter set and one filter."""

    def __init__(self, models: Iterable[ParticipantModel]):
        by_id: Dict[str, ParticipantModel] = {}
        for pm in models:
            if pm.participant_id in by_id:
                raise InvalidSpecError(f"Duplicate participant id {pm.participant_id!r}")
            by_id[pm.participant_id] = pm
        params = {pm.params for pm in by_id.values()}
        if len(params) > 1:
            raise InvalidSpecError(
                f"Registry models disagree on (k, d, alphabet_size, alpha): {sorted(map(str, params))}"
            )
        filters = {pm.filter_spec for pm in by_id.values()}
        if len(filters) > 1:
            raise InvalidSpecError(
                f"Registry models were enrolled with different filters: {sorted(map(str, filters))}"
            )
        self._models: Tuple[ParticipantModel, ...] = tuple(by_id[p] for p in sorted(by_id))

    @classmethod
    def from_store(cls, store: ModelStore) -> "Registry":
        return cls(store.load_all())

    @property
    def models(self) -> Tuple[ParticipantModel, ...]:
        return self._models

    @property
    def participant_ids(self) -> List[str]:
        return [pm.participant_id for pm in self._models]

    @property
    def params(self) -> Optional[ModelParams]:
        return self._models[0].params if self._models else None

    @property
    def filter_spec(self) -> Optional[FilterSpec]:
        """Filter every model was enrolled with, if recorded."""
        return self._models[0].filter_spec if self._models else None

    def __len__(self) -> int:
        return len(self._models)

    def __iter__(self):
        return iter(self._models)

    def __getitem__(self, participant_id: str) -> ParticipantModel:
        for pm in self._models:
            if pm.participant_id == participant_id:
                return pm
        raise KeyError(participant_id)


@dataclass(frozen=True)
class IdentificationResult:
    """Prediction plus the full ascending NRC ranking."""

    predicted: str
    scores: Tuple[Tuple[str, float], ...]
    coded_symbols: int

    def top(self, n: int) -> Tuple[Tuple[str, float], ...]:
        return self.scores[:n]


def identify(
    reg: Registry,
    segment: Sequence[float],
    filter_spec: FilterSpec,
    executor: Optional[Executor] = None,
) -> IdentificationResult:
    """
    Score a segment under every enrolled model and pick the minimum NRC.

    Scores are collected in participant-id order and sorted by (nrc, id), so
    ties go to the lexicographically smallest id and the result does not
    depend on thread scheduling.

    Args:
        reg: Registry of enrolled participants
        segment: Raw samples
        filter_spec: Filter applied before quantization
        executor: Optional executor to score models concurrently

    Raises:
        InvalidStateError: the registry is empty
        InvalidInputError: the segment is too short
    """
    if len(reg) == 0:
        raise InvalidStateError("Cannot identify against an empty registry")

    if executor is None:
        results: List[NrcScore] = [nrc(pm, segment, filter_spec) for pm in reg]
    else:
        results = list(executor.map(lambda pm: nrc(pm, segment, filter_spec), reg))

    ranked = sorted(
        ((pm.participant_id, score.nrc) for pm, score in zip(reg, results)),
        key=lambda item: (item[1], item[0]),
    )
    result = IdentificationResult(
        predicted=ranked[0][0],
        scores=tuple(ranked),
        coded_symbols=results[0].coded_symbols,
    )
    logger.debug(f"[identify] predicted={result.predicted} nrc={ranked[0][1]:.6f}")
    return result
