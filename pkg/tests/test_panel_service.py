import numpy as np
import pytest

from evodepth.errors import PanelError
from evodepth.models.panel import Grid, CurveSample, LongRecord, MeterPanel


def test_fold_to_daily_reshapes_by_day(panel_service):
    record = LongRecord('a', np.arange(10), np.arange(1, 11))

    sample = panel_service.fold_to_daily(record, 5)

    np.testing.assert_array_equal(sample.values, [[1, 2, 3, 4, 5], [6, 7, 8, 9, 10]])
    assert sample.labels == [1, 2]
    assert sample.grid == Grid.uniform(5)


def test_fold_to_daily_rejects_remainder(panel_service):
    record = LongRecord('a', np.arange(7), np.arange(7))

    with pytest.raises(PanelError, match='remainder 2'):
        panel_service.fold_to_daily(record, 5)


def test_fold_to_daily_single_day(panel_service):
    record = LongRecord('a', np.arange(6), np.full(6, 3.5))

    sample = panel_service.fold_to_daily(record, 6)

    assert sample.n == 1
    np.testing.assert_array_equal(sample.values[0], record.readings)


def test_fold_then_flatten_reproduces_record(panel_service, rng):
    readings = rng.normal(size=48)
    record = LongRecord('a', np.arange(48), readings)

    sample = panel_service.fold_to_daily(record, 12)

    np.testing.assert_array_equal(sample.values.reshape(-1), readings)


def test_fold_rejects_uneven_spacing_within_day(panel_service):
    record = LongRecord('a', [0, 1, 2, 4, 5, 6, 7, 8], np.zeros(8))

    with pytest.raises(PanelError, match='day 1'):
        panel_service.fold_to_daily(record, 4)


def test_fold_rejects_decreasing_timestamps(panel_service):
    record = LongRecord('a', [0, 2, 1, 3], np.zeros(4))

    with pytest.raises(PanelError, match='strictly increasing'):
        panel_service.fold_to_daily(record, 2)


def test_fold_accepts_datetime_timestamps(panel_service):
    stamps = np.arange('2024-01-01T00', '2024-01-03T00', 6, dtype='datetime64[h]').astype('datetime64[ns]')
    record = LongRecord('a', stamps, np.arange(8))

    sample = panel_service.fold_to_daily(record, 4)

    assert sample.values.shape == (2, 4)


def test_fold_rejects_day_starting_at_noon(panel_service):
    stamps = np.arange('2020-01-01T12', '2020-01-03T12', dtype='datetime64[h]').astype('datetime64[ns]')
    record = LongRecord('a', stamps, np.arange(48))

    with pytest.raises(PanelError, match='partial day 1'):
        panel_service.fold_to_daily(record, 24)


def test_fold_rejects_day_missing_its_last_slots(panel_service):
    stamps = np.arange('2020-01-01T00', '2020-01-01T12', dtype='datetime64[h]')
    record = LongRecord('a', stamps, np.arange(12))

    with pytest.raises(PanelError, match='partial day'):
        panel_service.fold_to_daily(record, 12)


def test_assemble_panel_shape(panel_service):
    samples = [(f"m{i}", CurveSample(Grid.uniform(4), np.full((2, 4), i))) for i in range(3)]

    panel = panel_service.assemble_panel(samples)

    assert panel.shape == (3, 2, 4)
    assert panel.meter_ids == ['m0', 'm1', 'm2']
    assert panel.day_index == [1, 2]


def test_assemble_panel_names_ragged_meter(panel_service):
    samples = [
        ('m0', CurveSample(Grid.uniform(4), np.zeros((2, 4)))),
        ('m1', CurveSample(Grid.uniform(4), np.zeros((2, 4)))),
        ('m2', CurveSample(Grid.uniform(4), np.zeros((3, 4)))),
    ]

    with pytest.raises(PanelError, match='m2'):
        panel_service.assemble_panel(samples)


def test_assemble_panel_names_grid_mismatch(panel_service):
    samples = [
        ('m0', CurveSample(Grid.uniform(4), np.zeros((2, 4)))),
        ('odd', CurveSample(Grid.uniform(5), np.zeros((2, 5)))),
    ]

    with pytest.raises(PanelError, match='odd'):
        panel_service.assemble_panel(samples)


@pytest.mark.parametrize('count', [0, 1])
def test_assemble_panel_needs_two_meters(panel_service, count):
    samples = [('m0', CurveSample(Grid.uniform(4), np.zeros((2, 4))))][:count]

    with pytest.raises(PanelError, match='N >= 2 required'):
        panel_service.assemble_panel(samples)


def test_assemble_panel_is_permutation_equivariant(panel_service, rng):
    samples = [(f"m{i}", CurveSample(Grid.uniform(5), rng.normal(size=(3, 5)))) for i in range(4)]
    order = [2, 0, 3, 1]

    panel = panel_service.assemble_panel(samples)
    permuted = panel_service.assemble_panel([samples[i] for i in order])

    assert permuted.meter_ids == [panel.meter_ids[i] for i in order]
    np.testing.assert_array_equal(permuted.values, panel.values[order])


def test_panel_from_long_records(panel_service):
    records = [LongRecord(m, np.arange(6), np.arange(6) + k) for k, m in enumerate(['a', 'b'])]

    panel = panel_service.panel_from_long_records(records, 3)

    assert panel.shape == (2, 2, 3)
    np.testing.assert_array_equal(panel.values[1, 1], [4, 5, 6])


def test_trim_keeps_positive_panel(panel_service, make_panel):
    panel = make_panel(np.ones((3, 2, 6)))

    assert panel_service.trim_nonzero_window(panel) is panel


def test_trim_finds_largest_nonzero_window(panel_service, make_panel, rng):
    values = np.zeros((4, 3, 50))
    values[:, :, 10:41] = rng.uniform(0.5, 2.0, size=(4, 3, 31))
    # a shorter window must lose against 10..40
    values[:, :, 45:48] = 1.0
    panel = make_panel(values)

    assert panel_service.nonzero_window(panel) == (10, 40)
    trimmed = panel_service.trim_nonzero_window(panel)
    assert trimmed.grid.size == 31
    assert trimmed.grid.points[0] == panel.grid.points[10]
    np.testing.assert_array_equal(trimmed.values, values[:, :, 10:41])


def test_trim_is_idempotent(panel_service, make_panel):
    values = np.zeros((3, 2, 20))
    values[:, :, 5:15] = 2.0
    panel = make_panel(values)

    once = panel_service.trim_nonzero_window(panel)
    twice = panel_service.trim_nonzero_window(once)

    assert twice.grid == once.grid
    np.testing.assert_array_equal(twice.values, once.values)


def test_trim_rejects_all_zero_panel(panel_service, make_panel):
    with pytest.raises(PanelError):
        panel_service.trim_nonzero_window(make_panel(np.zeros((2, 2, 5))))


def test_meter_and_day_views(make_panel):
    values = np.arange(3 * 2 * 4, dtype=float).reshape(3, 2, 4)
    panel = make_panel(values)

    np.testing.assert_array_equal(panel.meter_sample(1).values, values[1])
    assert panel.meter_sample(1).labels == [1, 2]
    np.testing.assert_array_equal(panel.day_sample(0).values, values[:, 0])
    assert panel.day_sample(0).labels == ['m0', 'm1', 'm2']


def test_select_meters_reorders(make_panel):
    values = np.arange(3 * 2 * 4, dtype=float).reshape(3, 2, 4)
    panel = make_panel(values)

    selected = panel.select_meters(['m2', 'm0'])

    assert selected.meter_ids == ['m2', 'm0']
    np.testing.assert_array_equal(selected.values, values[[2, 0]])
    with pytest.raises(PanelError):
        panel.select_meters(['nope', 'm0'])


def test_panel_rejects_nonfinite_values():
    values = np.zeros((2, 2, 3))
    values[1, 1, 1] = np.nan

    with pytest.raises(PanelError, match='finite'):
        MeterPanel(['a', 'b'], [1, 2], Grid.uniform(3), values)


def test_grid_must_increase():
    with pytest.raises(PanelError):
        Grid([0.0, 0.5, 0.5])
    with pytest.raises(PanelError):
        Grid([1.0])
