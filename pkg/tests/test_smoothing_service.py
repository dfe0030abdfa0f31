import numpy as np
import pytest

from evodepth.errors import SmoothingError
from evodepth.models.panel import Grid, CurveSample
from evodepth.services.smoothing_service import SmoothingService, parse_basis_grid


def sine_sample(p=100, n=1):
    grid = Grid.uniform(p)
    return CurveSample(grid, np.tile(np.sin(2 * np.pi * grid.points), (n, 1)))


@pytest.mark.parametrize('n_basis', [4, 7, 12])
def test_cubic_polynomial_is_reproduced(smoothing_service, n_basis):
    grid = Grid.uniform(30)
    x = grid.points
    sample = CurveSample(grid, [1 - 2 * x + 0.5 * x ** 2 + 3 * x ** 3])

    fit = smoothing_service.fit_bsplines(sample, n_basis)

    assert fit.n_basis == n_basis
    assert fit.mse.max() < 1e-16


def test_knot_vector_is_clamped(smoothing_service):
    knots = smoothing_service.knots(Grid.uniform(20), 8)

    assert knots.size == 8 + 4
    np.testing.assert_array_equal(knots[:4], np.zeros(4))
    np.testing.assert_array_equal(knots[-4:], np.ones(4))
    assert np.all(np.diff(knots) >= 0)


def test_constant_curve(smoothing_service):
    sample = CurveSample(Grid.uniform(25), [np.full(25, 4.2)])

    fit = smoothing_service.fit_bsplines(sample, 8)

    np.testing.assert_allclose(smoothing_service.fitted(fit).values, sample.values, atol=1e-12)
    np.testing.assert_allclose(smoothing_service.derivative(fit).values, 0, atol=1e-12)


def test_sine_fit_accuracy(smoothing_service):
    sample = sine_sample()

    fit = smoothing_service.fit_bsplines(sample, 20)

    assert np.max(np.abs(smoothing_service.evaluate(fit) - sample.values)) < 1e-4


def test_linear_curve_derivative(smoothing_service):
    grid = Grid.uniform(15)
    sample = CurveSample(grid, [2 + 3 * grid.points])

    fit = smoothing_service.fit_bsplines(sample, 6)

    np.testing.assert_allclose(smoothing_service.derivative(fit).values, 3, atol=1e-10)


def test_sine_derivative_matches_cosine(smoothing_service):
    sample = sine_sample()
    x = sample.grid.points

    derivative = smoothing_service.derivative(smoothing_service.fit_bsplines(sample, 20)).values[0]

    interior = (x >= 0.05) & (x <= 0.95)
    expected = 2 * np.pi * np.cos(2 * np.pi * x)
    assert np.max(np.abs(derivative[interior] - expected[interior])) < 0.05


def test_derivative_matches_finite_differences(smoothing_service):
    sample = sine_sample()
    h = sample.grid.points[1] - sample.grid.points[0]
    fit = smoothing_service.fit_bsplines(sample, 20)

    fitted = smoothing_service.evaluate(fit)[0]
    derivative = smoothing_service.derivative(fit).values[0]
    central = (fitted[2:] - fitted[:-2]) / (2 * h)

    bound = h ** 2 / 6 * (2 * np.pi) ** 3
    assert np.max(np.abs(central - derivative[1:-1])) < 10 * bound


def test_fit_is_linear(smoothing_service, rng):
    grid = Grid.uniform(40)
    y1, y2 = rng.normal(size=(2, 40))

    c1 = smoothing_service.fit_bsplines(CurveSample(grid, [y1]), 10).coefficients
    c2 = smoothing_service.fit_bsplines(CurveSample(grid, [y2]), 10).coefficients
    combined = smoothing_service.fit_bsplines(CurveSample(grid, [2.5 * y1 - 0.5 * y2]), 10).coefficients

    np.testing.assert_allclose(combined, 2.5 * c1 - 0.5 * c2, atol=1e-10)


def test_refit_is_idempotent(smoothing_service, rng):
    sample = CurveSample(Grid.uniform(40), rng.normal(size=(3, 40)))

    fit = smoothing_service.fit_bsplines(sample, 12)
    refit = smoothing_service.fit_bsplines(smoothing_service.fitted(fit), 12)

    np.testing.assert_allclose(refit.coefficients, fit.coefficients, atol=1e-10)


def test_noiseless_cubic_selects_smallest_basis(smoothing_service):
    grid = Grid.uniform(60)
    x = grid.points
    sample = CurveSample(grid, [x ** 3 - x, 2 * x ** 2 + 1])

    n_basis, scores = smoothing_service.select_num_basis(sample, list(range(6, 16)))

    assert n_basis == 6
    assert sorted(scores) == list(range(6, 16))


def test_noisy_curves_select_interior_basis(smoothing_service, rng):
    grid = Grid.uniform(100)
    signal = np.sin(4 * np.pi * grid.points)
    sample = CurveSample(grid, signal + rng.normal(scale=0.1, size=(5, 100)))

    n_basis, _ = smoothing_service.select_num_basis(sample, list(range(6, 41)))

    assert 6 < n_basis < 40


def test_single_candidate_is_selected(smoothing_service):
    n_basis, scores = smoothing_service.select_num_basis(sine_sample(), [12])

    assert n_basis == 12
    assert list(scores) == [12]


@pytest.mark.parametrize('n_basis', [3, 21])
def test_invalid_basis_size(smoothing_service, n_basis):
    sample = CurveSample(Grid.uniform(20), np.zeros((1, 20)))

    with pytest.raises(SmoothingError):
        smoothing_service.fit_bsplines(sample, n_basis)


def test_second_derivative_is_rejected(smoothing_service):
    fit = smoothing_service.fit_bsplines(sine_sample(), 10)

    with pytest.raises(SmoothingError, match='first derivatives'):
        smoothing_service.derivative(fit, 2)


def test_smooth_panel(smoothing_service, make_panel, rng):
    panel = make_panel(rng.normal(size=(2, 3, 20)))

    smoothed, info = smoothing_service.smooth_panel(panel, 8)
    derivatives, auto_info = smoothing_service.smooth_panel(panel, 'auto', derivative_order=1)

    assert smoothed.shape == panel.shape
    assert smoothed.meter_ids == panel.meter_ids
    assert info['n_basis'] == 8
    assert info['derivative_order'] == 0
    assert derivatives.shape == panel.shape
    assert 6 <= auto_info['n_basis'] <= 20
    assert auto_info['derivative_order'] == 1
    assert auto_info['gcv_scores']


def test_smooth_panel_rejects_second_derivative(smoothing_service, make_panel):
    with pytest.raises(SmoothingError):
        smoothing_service.smooth_panel(make_panel(np.zeros((2, 2, 10))), 6, derivative_order=2)


@pytest.mark.parametrize('text, expected', [
    ('6-8', [6, 7, 8]),
    ('10,6, 8', [6, 8, 10]),
    ('12', [12]),
])
def test_parse_basis_grid(text, expected):
    assert parse_basis_grid(text) == expected


def test_parse_basis_grid_rejects_garbage():
    with pytest.raises(SmoothingError):
        parse_basis_grid('six-forty')


def test_basis_grid_from_environment(monkeypatch):
    monkeypatch.setenv('EVODEPTH_BASIS_GRID', '5-9')

    assert SmoothingService().basis_grid == [5, 6, 7, 8, 9]
