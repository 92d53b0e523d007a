"""
Shared plumbing: errors, configuration and atomic file writes.
"""

from .config import (
    CONFIG_ENV_VAR,
    RunConfig,
    get_run_config,
    load_config_file,
    set_run_config,
)
from .errors import (
    EXIT_CONFIG,
    EXIT_DATASET,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_STORE,
    CapacityError,
    ChecksumError,
    ConfigError,
    DegenerateDataError,
    InvalidDatasetError,
    InvalidInputError,
    InvalidSpecError,
    InvalidStateError,
    InvalidSymbolError,
    InvariantViolation,
    ModelDecodeError,
    ModelStoreError,
    NrcIdError,
    TruncatedStreamError,
    VersionMismatchError,
)
from .files import atomic_write_bytes, atomic_write_text

__all__ = [
    # Configuration
    "CONFIG_ENV_VAR",
    "RunConfig",
    "get_run_config",
    "load_config_file",
    "set_run_config",
    # Exit codes
    "EXIT_CONFIG",
    "EXIT_DATASET",
    "EXIT_INTERNAL",
    "EXIT_OK",
    "EXIT_STORE",
    # Errors
    "CapacityError",
    "ChecksumError",
    "ConfigError",
    "DegenerateDataError",
    "InvalidDatasetError",
    "InvalidInputError",
    "InvalidSpecError",
    "InvalidStateError",
    "InvalidSymbolError",
    "InvariantViolation",
    "ModelDecodeError",
    "ModelStoreError",
    "NrcIdError",
    "TruncatedStreamError",
    "VersionMismatchError",
    # Files
    "atomic_write_bytes",
    "atomic_write_text",
]
