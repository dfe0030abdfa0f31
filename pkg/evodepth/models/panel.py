import numpy as np

from evodepth.errors import PanelError


def _frozen(array, dtype=float):
    """Copy into a read-only numpy array"""
    result = np.array(array, dtype=dtype, copy=True)
    result.flags.writeable = False
    return result


class Grid:
    """Ordered abscissae shared by every curve of a sample or panel"""

    def __init__(self, points):
        points = _frozen(points)
        if points.ndim != 1 or points.size < 2:
            raise PanelError(f"Grid needs at least 2 points, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise PanelError("Grid points must be finite")
        if np.any(np.diff(points) <= 0):
            raise PanelError("Grid points must be strictly increasing")
        self.points = points

    @classmethod
    def uniform(cls, p, start=0.0, stop=1.0):
        """Equally spaced grid of p points on [start, stop]"""
        return cls(np.linspace(start, stop, int(p)))

    @property
    def size(self):
        return self.points.size

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"Grid(p={self.size}, [{self.points[0]:g}, {self.points[-1]:g}])"

    def subset(self, start, stop):
        """Grid restricted to indices start..stop (inclusive)"""
        return Grid(self.points[start:stop + 1])

    def to_list(self):
        return [float(x) for x in self.points]


class CurveSample:
    """n curves observed on a shared grid (one meter's days, or one day's meters)"""

    def __init__(self, grid, values, labels=None):
        values = _frozen(values)
        if values.ndim != 2:
            raise PanelError(f"Curve values must be an n x p matrix, got shape {values.shape}")
        if values.shape[1] != grid.size:
            raise PanelError(f"Curves have {values.shape[1]} points but the grid has {grid.size}")
        if not np.all(np.isfinite(values)):
            raise PanelError("Curve values must be finite")
        if labels is None:
            labels = list(range(1, values.shape[0] + 1))
        labels = list(labels)
        if len(labels) != values.shape[0]:
            raise PanelError(f"Got {len(labels)} labels for {values.shape[0]} curves")
        self.grid = grid
        self.values = values
        self.labels = labels

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"CurveSample(n={self.n}, p={self.p})"

    def with_values(self, values):
        """Same grid and labels, new values"""
        return CurveSample(self.grid, values, self.labels)


class MeterPanel:
    """N meters x T days x p grid points with identifiers and grid metadata"""

    def __init__(self, meter_ids, day_index, grid, values):
        values = _frozen(values)
        meter_ids = [str(m) for m in meter_ids]
        day_index = list(day_index)
        if values.ndim != 3:
            raise PanelError(f"Panel values must be N x T x p, got shape {values.shape}")
        n_meters, n_days, p = values.shape
        if len(meter_ids) != n_meters:
            raise PanelError(f"Got {len(meter_ids)} meter ids for {n_meters} meters")
        if len(set(meter_ids)) != len(meter_ids):
            raise PanelError("Meter ids must be unique")
        if len(day_index) != n_days:
            raise PanelError(f"Got {len(day_index)} day labels for {n_days} days")
        if p != grid.size:
            raise PanelError(f"Panel has {p} grid points but the grid has {grid.size}")
        if n_meters < 2:
            raise PanelError(f"N >= 2 required, got N = {n_meters}")
        if n_days < 2:
            raise PanelError(f"T >= 2 required, got T = {n_days}")
        if not np.all(np.isfinite(values)):
            raise PanelError("Panel values must be finite (gap filling is not supported)")
        self.meter_ids = meter_ids
        self.day_index = day_index
        self.grid = grid
        self.values = values

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_meters(self):
        return self.values.shape[0]

    @property
    def n_days(self):
        return self.values.shape[1]

    def __repr__(self):
        return f"MeterPanel(N={self.n_meters}, T={self.n_days}, p={self.grid.size})"

    def meter_sample(self, i):
        """The T daily curves of meter i (a row of the panel)"""
        return CurveSample(self.grid, self.values[i], self.day_index)

    def day_sample(self, t):
        """The N meter curves of day t (a column of the panel)"""
        return CurveSample(self.grid, self.values[:, t, :], self.meter_ids)

    def select_meters(self, meter_ids):
        """Panel restricted to the given meters, in the given order"""
        positions = {m: i for i, m in enumerate(self.meter_ids)}
        missing = [m for m in meter_ids if m not in positions]
        if missing:
            raise PanelError(f"Unknown meter ids: {missing}")
        order = [positions[m] for m in meter_ids]
        return MeterPanel(list(meter_ids), self.day_index, self.grid, self.values[order])

    def with_values(self, values, grid=None):
        """Same identifiers, new values (and optionally a new grid)"""
        return MeterPanel(self.meter_ids, self.day_index, grid or self.grid, values)


class LongRecord:
    """One meter's readings in time order, before slicing into days"""

    def __init__(self, meter_id, timestamps, readings):
        readings = _frozen(readings)
        timestamps = np.array(timestamps, copy=True)
        timestamps.flags.writeable = False
        if readings.ndim != 1:
            raise PanelError("Readings must be one-dimensional")
        if timestamps.shape != readings.shape:
            raise PanelError(
                f"Meter {meter_id}: {timestamps.size} timestamps for {readings.size} readings"
            )
        self.meter_id = str(meter_id)
        self.timestamps = timestamps
        self.readings = readings

    def __len__(self):
        return self.readings.size

    def __repr__(self):
        return f"LongRecord(meter_id={self.meter_id!r}, length={len(self)})"
