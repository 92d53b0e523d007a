"""
Enrollment, NRC scoring and closed-set identification.
"""

from .model_file import (
    FILE_FORMAT_VERSION,
    MODEL_SUFFIX,
    participant_model_from_text,
    participant_model_to_text,
    read_model_file,
    write_model_file,
)
from .participant import NrcScore, ParticipantModel, enroll, nrc, train_codebook
from .registry import IdentificationResult, Registry, identify
from .store import (
    STORE_ENV_VAR,
    DirectoryModelStore,
    ModelStore,
    get_model_store,
    set_model_store,
)

__all__ = [
    # Model files
    "FILE_FORMAT_VERSION",
    "MODEL_SUFFIX",
    "participant_model_from_text",
    "participant_model_to_text",
    "read_model_file",
    "write_model_file",
    # Enrollment and scoring
    "NrcScore",
    "ParticipantModel",
    "enroll",
    "nrc",
    "train_codebook",
    # Identification
    "IdentificationResult",
    "Registry",
    "identify",
    # Store
    "STORE_ENV_VAR",
    "DirectoryModelStore",
    "ModelStore",
    "get_model_store",
    "set_model_store",
]
