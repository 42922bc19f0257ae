# -*- coding: utf-8 -*-
"""Shared fixtures for the simon32lab test suite."""

import sys
from pathlib import Path

import pytest

# Make the repository root importable (main.py and the simon32lab package).
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from simon32lab.shared_memory import SharedMemoryConfig  # noqa: E402


@pytest.fixture
def serial_cfg() -> SharedMemoryConfig:
    return SharedMemoryConfig.from_dict({"enabled": False, "workers": 1})


@pytest.fixture
def threaded_cfg() -> SharedMemoryConfig:
    return SharedMemoryConfig.from_dict({"enabled": True, "workers": 4, "min_items_per_worker": 1, "chunk_size": 8})
