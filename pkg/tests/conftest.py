import os

import numpy as np
import pytest

from evodepth.models.panel import Grid, CurveSample, MeterPanel
from evodepth.services.depth_service import DepthService
from evodepth.services.detection_service import DetectionService
from evodepth.services.panel_service import PanelService
from evodepth.services.simulation_service import SimulationService
from evodepth.services.smoothing_service import SmoothingService
from evodepth.services.storage_service import StorageService


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Every test starts from the documented defaults, whatever .env says"""
    for name in list(os.environ):
        if name.startswith('EVODEPTH_'):
            monkeypatch.delenv(name, raising=False)


@pytest.fixture
def panel_service():
    return PanelService()


@pytest.fixture
def storage_service():
    return StorageService()


@pytest.fixture
def depth_service():
    return DepthService()


@pytest.fixture
def smoothing_service():
    return SmoothingService()


@pytest.fixture
def simulation_service():
    return SimulationService()


@pytest.fixture
def detection_service():
    service = DetectionService()
    service.parallel = False
    return service


@pytest.fixture
def constant_sample():
    """Factory for samples of constant curves at the given levels"""
    def make(levels, p=4):
        levels = np.asarray(levels, dtype=float)
        return CurveSample(Grid.uniform(p), np.repeat(levels[:, None], p, axis=1))
    return make


@pytest.fixture
def make_panel():
    """Factory for panels from an N x T x p array with ids m0, m1, ..."""
    def make(values, meter_ids=None):
        values = np.asarray(values, dtype=float)
        n_meters, n_days, p = values.shape
        meter_ids = meter_ids or [f"m{i}" for i in range(n_meters)]
        return MeterPanel(meter_ids, list(range(1, n_days + 1)), Grid.uniform(p), values)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
