"""Integration test specific fixtures."""

from __future__ import annotations

from pathlib import Path

import pytest

# Mark all tests in this directory as integration tests
pytestmark = pytest.mark.integration


@pytest.fixture
def config_file(tmp_path: Path):
    """Write a TOML config into the scratch directory and return its path."""

    def write(text: str, name: str = "config.toml") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return write
