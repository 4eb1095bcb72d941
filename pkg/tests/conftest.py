"""
Pytest configuration and fixtures for circle-lab tests.
"""
import os
import shutil
import tempfile
from pathlib import Path
from typing import Generator

import pytest

# Set test environment before importing package modules
os.environ["CIRCLE_LAB_ENVIRONMENT"] = "test"
os.environ["CIRCLE_LAB_LOG_TO_FILE"] = "false"
os.environ["CIRCLE_LAB_ENABLE_SENTRY"] = "false"
os.environ["CIRCLE_LAB_LOG_LEVEL"] = "WARNING"

from circle_lab.arcs import MollifierFamily
from circle_lab.expsum import CoefficientSequence, make_rng
from circle_lab.monitoring import performance_tracker
from circle_lab.settings import reload_settings
from circle_lab.surfaces import SurfaceSystem, WeightProfile


@pytest.fixture(scope="session")
def test_data_dir() -> Generator[Path, None, None]:
    """Create temporary directory for test artifacts."""
    temp_dir = tempfile.mkdtemp(prefix="circle_lab_test_")
    yield Path(temp_dir)
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def output_dir(tmp_path) -> Path:
    """Fresh output directory for one command run."""
    return tmp_path / "results"


@pytest.fixture
def cubes() -> SurfaceSystem:
    return SurfaceSystem.kth_powers(3)


@pytest.fixture
def squares() -> SurfaceSystem:
    return SurfaceSystem.kth_powers(2)


@pytest.fixture
def cubic_paraboloid() -> SurfaceSystem:
    return SurfaceSystem.k_paraboloid(2, 3)


@pytest.fixture
def twisted_cubic() -> SurfaceSystem:
    return SurfaceSystem.monomial_curve([1, 2, 3])


@pytest.fixture
def small_weight() -> WeightProfile:
    return WeightProfile(N=8)


@pytest.fixture
def ones_cubes_4(cubes) -> CoefficientSequence:
    """a = 1 on [1, 4] for the cubes."""
    return CoefficientSequence.all_ones(cubes, 4)


@pytest.fixture
def cubic_family() -> MollifierFamily:
    """Mollifiers at k=3, N=16, c1=1/8 (levels 1 and 2)."""
    return MollifierFamily(k=3, N=16)


@pytest.fixture
def rng():
    """Seeded counter-based generator."""
    return make_rng(12345)


@pytest.fixture(autouse=True)
def reset_monitoring():
    """Clear performance metrics between tests."""
    yield
    performance_tracker.reset()


@pytest.fixture
def settings_env(monkeypatch):
    """Set CIRCLE_LAB_* variables and reload the settings; restored afterwards."""

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(f"CIRCLE_LAB_{key.upper()}", str(value))
        return reload_settings()

    yield apply
    monkeypatch.undo()
    reload_settings()
