"""
conftest.py for pytest configuration and shared fixtures of the zerofilter
laboratory: small grids, sampled fields and a click runner for the CLI.
"""

import os

# Add the repository root to sys.path for package imports
# (required for test discovery)
import sys

import numpy as np
import pytest
from click.testing import CliRunner

sys.path.insert(
    0,
    os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")),
)

from zerofilter.models.grid import Field, Grid  # noqa: E402


@pytest.fixture(scope="session")
def grid():
    return Grid(64)


@pytest.fixture(scope="session")
def fine_grid():
    return Grid(256)


@pytest.fixture
def sine(grid):
    return Field.from_function(grid, np.sin)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "out"
    return str(path)


@pytest.fixture
def write_config(tmp_path):
    """Write INI text to a temporary file and return its path."""

    def _write(text, name="run.ini"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write
