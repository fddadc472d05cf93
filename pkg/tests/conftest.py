# tests/conftest.py
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from scripts.common import progress  # noqa: E402
from scripts.topology.pointcloud import PointCloud  # noqa: E402


@pytest.fixture(autouse=True)
def quiet_progress():
    progress.set_progress(False)
    yield
    progress.set_progress(True)


@pytest.fixture
def square_corners() -> PointCloud:
    return PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
