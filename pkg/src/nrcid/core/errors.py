"""
Exception hierarchy for nrcid.

Every error carries the CLI exit code it maps to, so the command layer can
translate failures without inspecting messages.
"""

from typing import List, Optional

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATASET = 3
EXIT_STORE = 4
EXIT_INTERNAL = 5


class NrcIdError(Exception):
    """Base class for all nrcid errors."""

    exit_code = EXIT_INTERNAL


# =============================================================================
# Configuration / specification errors
# =============================================================================


class ConfigError(NrcIdError, ValueError):
    """One or more RunConfig fields are invalid."""

    exit_code = EXIT_CONFIG

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__(
            "Invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations)
        )


class InvalidSpecError(NrcIdError, ValueError):
    """A filter, quantizer or model parameter set violates its invariants."""

    exit_code = EXIT_CONFIG


class CapacityError(InvalidSpecError):
    """|A|^d does not fit the probability denominator."""


# =============================================================================
# Input / dataset errors
# =============================================================================


class InvalidInputError(NrcIdError, ValueError):
    """Input data is empty or too short for the requested operation."""

    exit_code = EXIT_DATASET


class DegenerateDataError(InvalidInputError):
    """Training data has fewer distinct values than quantizer cells."""


class InvalidSymbolError(InvalidInputError):
    """A symbol lies outside the model alphabet."""


class InvalidDatasetError(NrcIdError, ValueError):
    """Dataset layout or contents are inconsistent."""

    exit_code = EXIT_DATASET


# =============================================================================
# State / store errors
# =============================================================================


class InvalidStateError(NrcIdError):
    """Operation requires state that is not there (e.g. an empty registry)."""

    exit_code = EXIT_STORE


class ModelStoreError(NrcIdError):
    """The model store cannot be read or written."""

    exit_code = EXIT_STORE


class ModelDecodeError(ModelStoreError):
    """A serialized model could not be decoded."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class VersionMismatchError(ModelDecodeError):
    """Serialized model declares an unsupported format version."""


class TruncatedStreamError(ModelDecodeError):
    """Serialized model ends before all declared content was read."""


class ChecksumError(ModelDecodeError):
    """Serialized model content does not match its checksum."""


class InvariantViolation(NrcIdError):
    """An internal invariant does not hold."""

    exit_code = EXIT_INTERNAL
