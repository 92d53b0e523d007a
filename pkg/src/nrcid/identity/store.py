"""
Model Store for nrcid

Provides a standardized interface for storing and loading enrolled
participant models. The directory store keeps one `<participant_id>.model`
file per participant.
"""

import logging
import os
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional

from ..core.config import DEFAULT_STORE_DIR, STORE_ENV_VAR
from ..core.errors import InvalidStateError, ModelStoreError
from ..core.files import PathLike
from .model_file import MODEL_SUFFIX, read_model_file, write_model_file
from .participant import ParticipantModel

logger = logging.getLogger(__name__)


class ModelStore(ABC):
    """Abstract base class for participant-model storage."""

    @abstractmethod
    def get_model(self, participant_id: str) -> ParticipantModel:
        """
        Load the model enrolled for a participant.

        Args:
            participant_id: Participant identifier

        Returns:
            ParticipantModel

        Raises:
            ModelStoreError: no model stored or the model cannot be read
        """

    @abstractmethod
    def store_model(self, pm: ParticipantModel) -> None:
        """Store (or atomically replace) a participant model."""

    @abstractmethod
    def delete_model(self, participant_id: str) -> bool:
        """
        Delete a participant's model.

        Returns:
            True if a model was removed, False if none existed
        """

    @abstractmethod
    def list_participants(self) -> List[str]:
        """Sorted identifiers of all stored participants."""

    def load_all(self) -> List[ParticipantModel]:
        """
        Load every stored model, ordered by participant id.

        Raises:
            InvalidStateError: the store holds no models
        """
        participants = self.list_participants()
        if not participants:
            raise InvalidStateError(f"Model store {self} holds no participant models")
        return [self.get_model(p) for p in participants]


class DirectoryModelStore(ModelStore):
    """
    Model store backed by a directory of `<participant_id>.model` files.

    The directory defaults to $NRCID_STORE, then ~/.nrcid/models.
    """

    def __init__(self, base_dir: Optional[PathLike] = None):
        """
        Initialize the directory store.

        Args:
            base_dir: Store directory. If None, uses $NRCID_STORE or ~/.nrcid/models
        """
        if base_dir is None:
            env_dir = os.getenv(STORE_ENV_VAR)
            base_dir = Path(env_dir) if env_dir else DEFAULT_STORE_DIR
        self.base_dir = Path(base_dir)
        logger.debug(f"DirectoryModelStore at: {self.base_dir}")

    def __str__(self) -> str:
        return str(self.base_dir)

    def _get_model_path(self, participant_id: str) -> Path:
        if not participant_id or "/" in participant_id or "\\" in participant_id or participant_id.startswith("."):
            raise ModelStoreError(f"Invalid participant id for a model file name: {participant_id!r}")
        return self.base_dir / f"{participant_id}{MODEL_SUFFIX}"

    def get_model(self, participant_id: str) -> ParticipantModel:
        path = self._get_model_path(participant_id)
        if not path.is_file():
            raise ModelStoreError(f"No model for {participant_id} in {self.base_dir}")
        pm = read_model_file(path)
        if pm.participant_id != participant_id:
            raise ModelStoreError(
                f"{path} holds participant {pm.participant_id!r}, expected {participant_id!r}"
            )
        return pm

    def store_model(self, pm: ParticipantModel) -> None:
        path = self._get_model_path(pm.participant_id)
        try:
            write_model_file(path, pm)
        except OSError as e:
            raise ModelStoreError(f"Cannot write model {path}: {e}") from e
        logger.info(f"Stored model for {pm.participant_id} at {path}")

    def delete_model(self, participant_id: str) -> bool:
        path = self._get_model_path(participant_id)
        try:
            if path.exists():
                path.unlink()
                logger.info(f"Deleted model for {participant_id}")
                return True
            return False
        except OSError as e:
            raise ModelStoreError(f"Cannot delete model {path}: {e}") from e

    def list_participants(self) -> List[str]:
        if not self.base_dir.exists():
            return []
        if not self.base_dir.is_dir():
            raise ModelStoreError(f"Model store {self.base_dir} is not a directory")
        try:
            return sorted(p.stem for p in self.base_dir.glob(f"*{MODEL_SUFFIX}") if p.is_file())
        except OSError as e:
            raise ModelStoreError(f"Cannot list model store {self.base_dir}: {e}") from e


# =============================================================================
# Global Model Store Instance
# =============================================================================

_model_store: Optional[ModelStore] = None


def get_model_store() -> ModelStore:
    """
    Get the global model store instance.

    Returns:
        Configured model store instance
    """
    global _model_store

    if _model_store is None:
        _model_store = DirectoryModelStore()
        logger.info(f"Initialized model store: {type(_model_store).__name__}")

    return _model_store


def set_model_store(store: Optional[ModelStore]) -> None:
    """
    Set (or reset with None) the global model store instance.

    Args:
        store: Model store instance to use
    """
    global _model_store
    _model_store = store
    if store is not None:
        logger.info(f"Set model store: {type(store).__name__}")
