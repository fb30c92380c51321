import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))  # for oracles.py

import pytest

from graspbench.domain import default_catalog
from graspbench.sequencer import SuiteConfig, generate_suite


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def small_suite():
    """Three balanced sets; enough structure for session and replay tests."""
    return generate_suite(SuiteConfig(n_sets=3, seed=42))


@pytest.fixture(scope="session")
def default_suite():
    """The full 30-set suite used by simulation-level tests."""
    return generate_suite(SuiteConfig(n_sets=30, seed=1))
