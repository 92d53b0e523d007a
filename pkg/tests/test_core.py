"""
Tests for run configuration and file helpers.
"""

import os
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest

from nrcid.core import (
    ConfigError,
    RunConfig,
    atomic_write_bytes,
    atomic_write_text,
    get_run_config,
    load_config_file,
    set_run_config,
)


class TestRunConfigSources:
    """Tests for RunConfig.from_sources precedence."""

    def test_defaults(self):
        """Test built-in defaults when nothing else is given."""
        config = RunConfig.from_sources(environ={})
        assert (config.k, config.d, config.alphabet_size, config.alpha) == (38, 2, 17, "auto")
        assert config.segment_seconds == 10.0
        assert (config.filter_order, config.cutoff_hz) == (5, 30.0)
        assert config.store is None
        assert config.validate() is config

    def test_env_store(self):
        """Test $NRCID_STORE sets the store directory."""
        config = RunConfig.from_sources(environ={"NRCID_STORE": "/tmp/models"})
        assert config.store == "/tmp/models"
        assert config.store_path() == Path("/tmp/models")

    def test_file_beats_env_and_flags_beat_file(self):
        """Test flags > config file > environment > defaults."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "nrcid.yaml"
            path.write_text("store: /from/file\nk: 12\nsegment-seconds: 5\ntrain_sessions: [day1, day2]\n")
            env = {"NRCID_STORE": "/from/env"}

            from_file = RunConfig.from_sources(config_path=path, environ=env)
            assert from_file.store == "/from/file"
            assert from_file.k == 12
            assert from_file.segment_seconds == 5
            assert from_file.train_sessions == ["day1", "day2"]

            flagged = RunConfig.from_sources({"k": 3, "d": None}, config_path=path, environ=env)
            assert flagged.k == 3
            assert flagged.d == 2

    def test_config_path_from_env(self):
        """Test $NRCID_CONFIG names the config file when no path is given."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "nrcid.yaml"
            path.write_text("alphabet_size: 8\n")
            config = RunConfig.from_sources(environ={"NRCID_CONFIG": str(path)})
        assert config.alphabet_size == 8

    def test_unknown_keys(self):
        """Test unknown file keys and override names are rejected."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "nrcid.yaml"
            path.write_text("colour: blue\n")
            with pytest.raises(ConfigError, match="colour"):
                load_config_file(path)
        with pytest.raises(ConfigError, match="shoe_size"):
            RunConfig.from_sources({"shoe_size": 9}, environ={})

    def test_bad_files(self):
        """Test missing, non-mapping and malformed files are config errors."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ConfigError):
                load_config_file(Path(tmpdir) / "absent.yaml")
            listing = Path(tmpdir) / "list.yaml"
            listing.write_text("- 1\n- 2\n")
            with pytest.raises(ConfigError):
                load_config_file(listing)
            broken = Path(tmpdir) / "broken.yaml"
            broken.write_text("k: [1, 2\n")
            with pytest.raises(ConfigError):
                load_config_file(broken)
            empty = Path(tmpdir) / "empty.yaml"
            empty.write_text("")
            assert load_config_file(empty) == {}


class TestRunConfigValidation:
    """Tests for RunConfig.validate and friends."""

    def test_every_violation_is_reported(self):
        """Test validate lists all problems at once."""
        config = RunConfig(k=0, alphabet_size=40, segment_seconds=-1.0, threads=0, format="json")
        with pytest.raises(ConfigError) as excinfo:
            config.validate()
        violations = excinfo.value.violations
        assert len(violations) >= 5
        assert any(v.startswith("model") for v in violations)
        assert any(v.startswith("quantizer") for v in violations)
        assert any("segment_seconds" in v for v in violations)
        assert any("threads" in v for v in violations)
        assert any("format" in v for v in violations)

    def test_filter_rules(self):
        """Test the filter order and cutoff are checked before any data is seen."""
        assert any(v.startswith("filter") for v in RunConfig(filter_order=0).violations())
        assert any(v.startswith("filter") for v in RunConfig(cutoff_hz=-5.0).violations())

    def test_test_session_in_training(self):
        """Test the held-out session cannot also be a training session."""
        config = RunConfig(train_sessions=["day1", "day2"], test_session="day2")
        assert any("test_session" in v for v in config.violations())

    def test_require(self):
        """Test require names each missing option as a flag."""
        with pytest.raises(ConfigError) as excinfo:
            RunConfig().require("dataset", "train_sessions")
        assert excinfo.value.violations == ["--dataset is required", "--train-sessions is required"]

    def test_derived_specs(self):
        """Test the parameter objects built from a configuration."""
        config = RunConfig(k=5, d=3, alphabet_size=9, alpha="0.5", cutoff_hz=40.0, filter_order=4)
        params = config.model_params()
        assert (params.k, params.d, params.alphabet_size, params.alpha) == (5, 3, 9, 0.5)
        assert config.model_params(k=7).k == 7
        assert config.quantizer_spec().alphabet_size == 9
        fspec = config.filter_spec(250.0)
        assert (fspec.sample_rate_hz, fspec.order, fspec.cutoff_hz) == (250.0, 4, 40.0)

    def test_sweep_grid_defaults_to_operating_point(self):
        """Test an empty sweep grid falls back to the single (k, d)."""
        assert RunConfig(k=9, d=1).sweep_grid() == {"k": [9], "d": [1]}
        assert RunConfig(sweep_k=[1, 2], sweep_d=[3]).sweep_grid() == {"k": [1, 2], "d": [3]}

    def test_global_instance(self):
        """Test set_run_config replaces the process-wide configuration."""
        config = RunConfig(k=4)
        set_run_config(config)
        assert get_run_config() is config
        set_run_config(None)


class TestAtomicWrites:
    """Tests for atomic file writes."""

    def test_write_creates_parents(self):
        """Test missing parent directories are created."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = atomic_write_text(Path(tmpdir) / "a" / "b" / "c.txt", "hello\n")
            assert path.read_text() == "hello\n"
            assert os.listdir(Path(tmpdir) / "a" / "b") == ["c.txt"]

    def test_overwrite_replaces_content(self):
        """Test an existing file is replaced whole."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "data.bin"
            atomic_write_bytes(path, b"first version")
            atomic_write_bytes(path, b"2nd")
            assert path.read_bytes() == b"2nd"

    def test_failed_write_leaves_original(self):
        """Test an interrupted write keeps the old file and removes the temporary one."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "data.txt"
            atomic_write_text(path, "original")
            with patch("nrcid.core.files.os.replace", side_effect=OSError("disk full")):
                with pytest.raises(OSError):
                    atomic_write_text(path, "replacement")
            assert path.read_text() == "original"
            assert os.listdir(tmpdir) == ["data.txt"]
