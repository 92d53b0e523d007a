"""
Run Configuration Management

Centralized configuration for every nrcid command.

Values are resolved in this order, first match wins:
    1. command-line flags
    2. YAML config file (--config PATH, or $NRCID_CONFIG)
    3. environment ($NRCID_STORE for the model store)
    4. built-in defaults (order 5, 30 Hz, L=17, 10 s segments, alpha auto, k=38, d=2)
"""

import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml

from .errors import ConfigError, NrcIdError

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "NRCID_CONFIG"
STORE_ENV_VAR = "NRCID_STORE"
DEFAULT_STORE_DIR = Path.home() / ".nrcid" / "models"
OUTPUT_FORMATS = ("text", "csv")


def _default_threads() -> int:
    return os.cpu_count() or 1


@dataclass
class RunConfig:
    """
    Every knob a command can be given.

    `k`/`d` are the operating point for enroll/identify/evaluate; `sweep_k`
    and `sweep_d` are the grids used by sweep (empty means "just k" / "just d").
    """

    # Model
    k: int = 38
    d: int = 2
    alphabet_size: int = 17
    alpha: Union[str, float] = "auto"

    # Signal
    segment_seconds: float = 10.0
    filter_order: int = 5
    cutoff_hz: float = 30.0

    # Protocol
    train_sessions: List[str] = field(default_factory=list)
    test_session: Optional[str] = None
    sweep_k: List[int] = field(default_factory=list)
    sweep_d: List[int] = field(default_factory=list)

    # Paths
    dataset: Optional[str] = None
    store: Optional[str] = None
    out: Optional[str] = None

    # Execution
    seed: int = 0
    threads: int = field(default_factory=_default_threads)
    format: str = "text"
    resume: bool = False
    verbose: bool = False

    # -------------------------------------------------------------------------
    # Construction
    # -------------------------------------------------------------------------

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_sources(
        cls,
        overrides: Optional[Mapping[str, Any]] = None,
        config_path: Optional[Union[str, Path]] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> "RunConfig":
        """
        Resolve a configuration from flags, config file, environment and defaults.

        Args:
            overrides: Values given on the command line (None entries are ignored)
            config_path: YAML config file; falls back to $NRCID_CONFIG
            environ: Environment mapping (defaults to os.environ)

        Returns:
            A RunConfig (not yet validated)

        Raises:
            ConfigError: unreadable config file or unknown keys
        """
        environ = os.environ if environ is None else environ
        config = cls()

        env_store = environ.get(STORE_ENV_VAR)
        if env_store:
            config = replace(config, store=env_store)

        path = config_path or environ.get(CONFIG_ENV_VAR)
        if path:
            config = replace(config, **load_config_file(path))

        given = {key: value for key, value in (overrides or {}).items() if value is not None}
        unknown = sorted(set(given) - set(cls.field_names()))
        if unknown:
            raise ConfigError([f"unknown option '{key}'" for key in unknown])
        return replace(config, **given)

    # -------------------------------------------------------------------------
    # Validation
    # -------------------------------------------------------------------------

    def violations(self) -> List[str]:
        """Every rule this configuration breaks (empty when valid)."""
        from ..quantizer import QuantizerSpec
        from ..signal import FilterSpec
        from ..xafcm import ModelParams

        problems: List[str] = []

        def check(label: str, build) -> None:
            try:
                build()
            except NrcIdError as e:
                problems.append(f"{label}: {e}")
            except (TypeError, ValueError) as e:
                problems.append(f"{label}: {e}")

        check("model", lambda: ModelParams(k=self.k, d=self.d, alphabet_size=self.alphabet_size, alpha=self.alpha))
        check("quantizer", lambda: QuantizerSpec(alphabet_size=self.alphabet_size))
        # Nyquist is checked once the dataset rate is known; a nominal 1 Hz
        # above twice the cutoff isolates the order/cutoff rules here.
        check(
            "filter",
            lambda: FilterSpec(
                sample_rate_hz=2.0 * float(self.cutoff_hz) + 1.0,
                order=self.filter_order,
                cutoff_hz=self.cutoff_hz,
            ),
        )

        if not _is_number(self.segment_seconds) or self.segment_seconds <= 0:
            problems.append(f"segment_seconds must be a positive number, got {self.segment_seconds!r}")
        if not _is_int(self.seed):
            problems.append(f"seed must be an integer, got {self.seed!r}")
        if not _is_int(self.threads) or self.threads < 1:
            problems.append(f"threads must be a positive integer, got {self.threads!r}")
        if self.format not in OUTPUT_FORMATS:
            problems.append(f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {self.format!r}")
        for name in ("sweep_k", "sweep_d"):
            values = getattr(self, name)
            if not isinstance(values, list) or not all(_is_int(v) and v >= 1 for v in values):
                problems.append(f"{name} must be a list of positive integers, got {values!r}")
        if not isinstance(self.train_sessions, list) or not all(isinstance(s, str) and s for s in self.train_sessions):
            problems.append(f"train_sessions must be a list of session ids, got {self.train_sessions!r}")
        elif self.test_session is not None and self.test_session in self.train_sessions:
            problems.append(f"test_session {self.test_session!r} is also a training session")
        return problems

    def validate(self) -> "RunConfig":
        """
        Raise one ConfigError listing every violation.

        Returns:
            self, for chaining
        """
        problems = self.violations()
        if problems:
            raise ConfigError(problems)
        return self

    def require(self, *names: str) -> None:
        """Raise a ConfigError naming every listed option that is unset or empty."""
        missing = [name for name in names if getattr(self, name) in (None, "", [])]
        if missing:
            raise ConfigError([f"--{name.replace('_', '-')} is required" for name in missing])

    # -------------------------------------------------------------------------
    # Value objects
    # -------------------------------------------------------------------------

    def model_params(self, k: Optional[int] = None, d: Optional[int] = None):
        from ..xafcm import ModelParams

        return ModelParams(
            k=self.k if k is None else k,
            d=self.d if d is None else d,
            alphabet_size=self.alphabet_size,
            alpha=self.alpha,
        )

    def quantizer_spec(self):
        from ..quantizer import QuantizerSpec

        return QuantizerSpec(alphabet_size=self.alphabet_size)

    def filter_spec(self, sample_rate_hz: float):
        from ..signal import FilterSpec

        return FilterSpec(sample_rate_hz=sample_rate_hz, order=self.filter_order, cutoff_hz=self.cutoff_hz)

    def store_path(self) -> Path:
        return Path(self.store) if self.store else DEFAULT_STORE_DIR

    def sweep_grid(self) -> Dict[str, List[int]]:
        return {"k": list(self.sweep_k) or [self.k], "d": list(self.sweep_d) or [self.d]}

    def get_summary(self) -> Dict[str, Any]:
        """Resolved configuration as plain values (for logging)."""
        return {name: getattr(self, name) for name in self.field_names()}


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a YAML config file into RunConfig field values.

    Keys may use dashes or underscores (`segment-seconds` or `segment_seconds`).

    Raises:
        ConfigError: the file is unreadable, not a mapping, or has unknown keys
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError([f"cannot read config file {path}: {e}"]) from e
    except yaml.YAMLError as e:
        raise ConfigError([f"config file {path} is not valid YAML: {e}"]) from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError([f"config file {path} must contain a mapping"])

    values = {str(key).replace("-", "_"): value for key, value in data.items()}
    unknown = sorted(set(values) - set(RunConfig.field_names()))
    if unknown:
        raise ConfigError([f"{path}: unknown key '{key}'" for key in unknown])
    logger.debug(f"Loaded config file {path}: {sorted(values)}")
    return values


# =============================================================================
# Global Configuration Instance
# =============================================================================

_run_config: Optional[RunConfig] = None


def get_run_config() -> RunConfig:
    """Get the global run configuration (defaults + environment on first use)."""
    global _run_config
    if _run_config is None:
        _run_config = RunConfig.from_sources()
    return _run_config


def set_run_config(config: Optional[RunConfig]) -> None:
    """Set (or reset with None) the global run configuration."""
    global _run_config
    _run_config = config
