"""Pytest configuration and shared fixtures."""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.python_nv_mdcs.business.tools.logger import detail, runtime  # noqa: E402
from src.python_nv_mdcs.core.physics import ThermalDephasingParams  # noqa: E402
from src.python_nv_mdcs.core.simulator import EnsembleModel, Resonance, ScanGrid  # noqa: E402

ZPL_MEV = 1945.0


@pytest.fixture
def thermal_params():
    """Localized-phonon parameters of the NV zero-phonon line."""
    return ThermalDephasingParams(gamma0=37.31, gamma_star=7890.0, e_ph=34.41)


@pytest.fixture
def single_model():
    """One Gaussian ensemble at the zero-phonon line."""
    return EnsembleModel(components=(Resonance(center=ZPL_MEV, sigma=2.6),), gamma=100.0)


@pytest.fixture
def two_component_model():
    """Narrow pair of lines 5 meV apart, equal weights."""
    return EnsembleModel(
        components=(Resonance(center=ZPL_MEV - 2.5, sigma=0.0), Resonance(center=ZPL_MEV + 2.5, sigma=0.0)),
        gamma=0.0,
    )


@pytest.fixture
def small_grid():
    """Quick 32 x 32 grid."""
    return ScanGrid.uniform(32, 32, 0.1)


@pytest.fixture
def thermal_series_x():
    """Temperatures from 6 K to 140 K."""
    return np.array([6.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0])


@pytest.fixture(autouse=True)
def reset_logging():
    """Restore the pipeline loggers after each test."""
    yield
    for log in (runtime, detail):
        log.setLevel(logging.INFO)
        for handler in log.handlers[:]:
            handler.setLevel(logging.INFO)
            if type(handler) is not logging.StreamHandler:
                log.removeHandler(handler)
                handler.close()
