"""
Shared fixtures: seeded synthetic cohorts and their on-disk datasets.
"""

from pathlib import Path

import pytest

from nrcid.eval import default_synthetic_spec, generate_synthetic
from nrcid.signal import write_dataset


@pytest.fixture(scope="session")
def cohort_spec():
    """The standard cohort: 5 participants, 3 x 60 s sessions, SNR 10 dB."""
    return default_synthetic_spec()


@pytest.fixture(scope="session")
def cohort(cohort_spec):
    return generate_synthetic(cohort_spec)


@pytest.fixture(scope="session")
def small_spec():
    """A quick cohort for CLI and report tests: 3 participants, 3 x 12 s sessions."""
    return default_synthetic_spec(participants=3, sessions=3, duration_seconds=12.0, seed=3)


@pytest.fixture(scope="session")
def small_cohort(small_spec):
    return generate_synthetic(small_spec)


@pytest.fixture
def small_dataset_dir(tmp_path, small_cohort) -> Path:
    root = tmp_path / "dataset"
    write_dataset(root, small_cohort)
    return root
