"""Test configuration and fixtures for the test suite."""

import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

import pytest

# Add the src directory to the path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))


@pytest.fixture(scope="session")
def reference_angles():
    """Detuning angles of the recorded intensity sets, in radians."""
    return [math.radians(angle) for angle in (0.0, 40.0, 90.0)]


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path

    # Cleanup
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture(autouse=True)
def clean_seed_env(monkeypatch):
    """Keep a developer's UNCLAB_SEED from leaking into tests."""
    monkeypatch.delenv("UNCLAB_SEED", raising=False)
