import json

import numpy as np
import pytest

from evodepth.errors import SimulationError
from evodepth.models.panel import Grid
from evodepth.models.scenario import GpConfig, SimModel, SimScenario
from evodepth.services.simulation_service import make_rng


def test_gp_sample_vanishing_variance(simulation_service):
    cfg = GpConfig(1e-30, 0.1, Grid.uniform(50))

    curve = simulation_service.gp_sample(cfg, make_rng(0))

    assert curve.shape == (50,)
    assert np.max(np.abs(curve)) < 1e-10


def test_gp_sample_zero_variance_is_exactly_zero(simulation_service):
    draws = simulation_service.gp_sample(GpConfig(0.0, 0.1, Grid.uniform(5)), make_rng(0), 3)

    np.testing.assert_array_equal(draws, np.zeros((3, 5)))


def test_gp_sample_covariance(simulation_service):
    cfg = GpConfig(0.8, 0.1, Grid.uniform(10))

    draws = simulation_service.gp_sample(cfg, make_rng(11), 20000)
    empirical = draws.T @ draws / draws.shape[0]

    assert np.max(np.abs(empirical - cfg.covariance())) < 0.1


def test_gp_sample_is_deterministic(simulation_service):
    cfg = GpConfig(1.5, 0.1, Grid.uniform(30))

    first = simulation_service.gp_sample(cfg, make_rng(42))
    second = simulation_service.gp_sample(cfg, make_rng(42))

    np.testing.assert_array_equal(first, second)


def test_scenario_defaults():
    scenario = SimScenario(SimModel.MODEL1)

    assert (scenario.n_meters, scenario.n_days, scenario.p, scenario.rho) == (100, 50, 50, 5)
    assert (scenario.eta_eps, scenario.lam, scenario.eta_ups_outlier) == (0.8, 0.1, 0.5)
    assert scenario.n_outliers == 5


@pytest.mark.parametrize('n_meters, fraction, expected', [
    (100, 0.01, 1),
    (100, 0.05, 5),
    (100, 0.10, 10),
    (50, 0.01, 1),
    (30, 0.05, 2),
])
def test_outlier_count(simulation_service, n_meters, fraction, expected):
    scenario = SimScenario(SimModel.MODEL2, n_meters=n_meters, n_days=6, p=8, outlier_fraction=fraction)

    labeled = simulation_service.generate(scenario)

    assert int(labeled.outlier_flags.sum()) == expected
    assert labeled.panel.n_meters == n_meters + expected
    assert not labeled.outlier_flags[:n_meters].any()


def test_model1_rejects_short_panel():
    with pytest.raises(SimulationError, match='T > rho'):
        SimScenario(SimModel.MODEL1, n_days=5, rho=5)


def test_scenario_round_trip():
    scenario = SimScenario(SimModel.MODEL2, n_meters=40, outlier_fraction=0.1, seed=9)

    again = SimScenario.from_dict(json.loads(scenario.to_json()))

    assert again.to_dict() == scenario.to_dict()


def test_generation_is_deterministic(simulation_service):
    scenario = SimScenario(SimModel.MODEL1, n_meters=10, n_days=12, p=15, outlier_fraction=0.2, seed=5)

    first = simulation_service.generate(scenario)
    second = simulation_service.generate(scenario)

    np.testing.assert_array_equal(first.panel.values, second.panel.values)
    np.testing.assert_array_equal(first.outlier_flags, second.outlier_flags)
    assert first.details['trend_windows'] == second.details['trend_windows']


def test_model1_meter_ids(simulation_service):
    scenario = SimScenario(SimModel.MODEL1, n_meters=10, n_days=8, p=6, outlier_fraction=0.2)

    labeled = simulation_service.generate(scenario)

    assert labeled.panel.meter_ids[:2] == ['m000', 'm001']
    assert labeled.outlier_ids == ['m010', 'm011']


def test_model1_interpolation(simulation_service):
    scenario = SimScenario(SimModel.MODEL1, n_meters=10, n_days=20, p=12, outlier_fraction=0.3, rho=4, seed=3)
    labeled = simulation_service.generate(scenario)
    x = scenario.grid.points
    day_effects = labeled.details['day_effects']
    meter_effects = labeled.details['meter_effects']

    for j, meter_id in enumerate(labeled.outlier_ids):
        window = labeled.details['trend_windows'][meter_id]
        t_a, t_b = window['t_a'], window['t_b']
        assert t_b - t_a == 4
        assert 1 <= t_a <= 20 - 4
        values = labeled.panel.values[10 + j]
        unmodified = np.sin(2 * np.pi * x)[None, :] + day_effects + meter_effects[10 + j][None, :]
        np.testing.assert_allclose(values[t_a - 1], unmodified[t_a - 1], rtol=0, atol=1e-12)
        np.testing.assert_allclose(values[t_b - 1], unmodified[t_b - 1], rtol=0, atol=1e-12)
        midpoint = (unmodified[t_a - 1] + unmodified[t_b - 1]) / 2
        np.testing.assert_allclose(values[t_a + 1], midpoint, rtol=0, atol=1e-12)
        # days outside the window are untouched
        outside = [t for t in range(1, 21) if t < t_a or t > t_b]
        np.testing.assert_allclose(values[[t - 1 for t in outside]], unmodified[[t - 1 for t in outside]],
                                   rtol=0, atol=1e-12)


def test_model1_noise_free_limit(simulation_service):
    scenario = SimScenario(SimModel.MODEL1, n_meters=5, n_days=10, p=16, outlier_fraction=0.2,
                           eta_eps=0.0, eta_ups=0.0)

    labeled = simulation_service.generate(scenario)

    expected = np.sin(2 * np.pi * scenario.grid.points)
    for i in range(5):
        for t in range(10):
            np.testing.assert_array_equal(labeled.panel.values[i, t], expected)


def test_model1_day_effect_is_shared(simulation_service):
    scenario = SimScenario(SimModel.MODEL1, n_meters=6, n_days=10, p=16, outlier_fraction=0.0, seed=2)

    values = simulation_service.generate(scenario).panel.values

    difference = values[0] - values[3]
    np.testing.assert_allclose(difference, np.broadcast_to(difference[0], difference.shape), atol=1e-12)


def test_model2_boundary_days(simulation_service):
    scenario = SimScenario(SimModel.MODEL2, n_meters=20, n_days=8, p=10, outlier_fraction=0.1, seed=4)
    labeled = simulation_service.generate(scenario)
    mean = np.sin(2 * np.pi * scenario.grid.points)
    eps_first, eps_last = labeled.details['eps_first'], labeled.details['eps_last']
    trend = labeled.panel.values - mean[None, None, :] - labeled.details['meter_effects'][:, None, :]

    np.testing.assert_allclose(trend[0, 0], eps_first, atol=1e-12)
    np.testing.assert_allclose(trend[0, -1], eps_last, atol=1e-12)
    np.testing.assert_allclose(trend[20, 0], eps_last, atol=1e-12)
    np.testing.assert_allclose(trend[20, -1], eps_first, atol=1e-12)
    np.testing.assert_allclose(trend[0] + trend[20], np.broadcast_to(eps_first + eps_last, trend[0].shape),
                               atol=1e-12)


def test_model2_inversion_is_noop_without_trend(simulation_service, monkeypatch):
    scenario = SimScenario(SimModel.MODEL2, n_meters=10, n_days=6, p=8, outlier_fraction=0.2, eta_ups=0.0)
    original = simulation_service.gp_sample

    def equal_group_curves(cfg, rng, size=None):
        draws = original(cfg, rng, size)
        if size == 2:
            draws[1] = draws[0]
        return draws

    monkeypatch.setattr(simulation_service, 'gp_sample', equal_group_curves)
    values = simulation_service.generate(scenario).panel.values

    np.testing.assert_allclose(values[10], values[0], atol=1e-12)


def test_write_simulation(simulation_service, storage_service, tmp_path):
    scenario = SimScenario(SimModel.MODEL1, n_meters=8, n_days=8, p=6, outlier_fraction=0.25, seed=1)
    labeled = simulation_service.generate(scenario)
    directory = tmp_path / 'sim'

    simulation_service.write_simulation(labeled, str(directory), {'command': 'simulate'})

    panel = storage_service.read_panel_archive(str(directory))
    np.testing.assert_array_equal(panel.values, labeled.panel.values)
    labels = storage_service.read_labels(str(directory / 'labels.csv'))
    assert [m for m, flag in labels.items() if flag] == labeled.outlier_ids
    written = storage_service.read_json(str(directory / 'scenario.json'))
    assert written['rng'] == 'numpy.random.PCG64'
    assert written['seed'] == 1
    assert set(written['trend_windows']) == set(labeled.outlier_ids)
    assert written['metadata'] == {'command': 'simulate'}
