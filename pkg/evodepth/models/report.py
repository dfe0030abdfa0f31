from enum import Enum

import numpy as np

from evodepth.errors import DetectionError
from evodepth.models.base import BaseModel
from evodepth.models.depth import DepthKind


class Method(str, Enum):
    TDEPTH = 'TDEPTH'
    STDEPTH = 'STDEPTH'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        for method in cls:
            if method.value == key:
                return method
        raise DetectionError(f"Unknown method: {value} (expected tdepth or stdepth)")

    @property
    def depth_kind(self):
        return DepthKind.MBD if self is Method.TDEPTH else DepthKind.SCALED_MBD


class DepthPanel:
    """N x T matrix of per-meter depth time series"""

    def __init__(self, matrix, kind, meter_ids, day_index):
        matrix = np.array(matrix, dtype=float, copy=True)
        if matrix.ndim != 2:
            raise DetectionError(f"Depth panel must be N x T, got shape {matrix.shape}")
        if matrix.shape != (len(meter_ids), len(day_index)):
            raise DetectionError(
                f"Depth panel shape {matrix.shape} does not match "
                f"{len(meter_ids)} meters x {len(day_index)} days"
            )
        matrix.flags.writeable = False
        self.matrix = matrix
        self.kind = DepthKind.parse(kind)
        self.meter_ids = list(meter_ids)
        self.day_index = list(day_index)

    @property
    def n_meters(self):
        return self.matrix.shape[0]

    @property
    def n_days(self):
        return self.matrix.shape[1]

    def __repr__(self):
        return f"DepthPanel(kind={self.kind.value}, N={self.n_meters}, T={self.n_days})"


class Prototype:
    """Trimmed mean of the deepest depth series"""

    def __init__(self, series, trim_count, members):
        series = np.array(series, dtype=float, copy=True)
        series.flags.writeable = False
        self.series = series
        self.trim_count = int(trim_count)
        # meter ids averaged into the prototype, deepest first
        self.members = list(members)

    def __len__(self):
        return self.series.size

    def __repr__(self):
        return f"Prototype(T={self.series.size}, trim_count={self.trim_count})"


class DetectionReport(BaseModel):
    """Outcome of one TDEPTH / STDEPTH run with every intermediate quantity"""

    def __init__(self, method, derivative_order, gamma, medcouple, q3, iqr, threshold,
                 meter_ids, distances, prototype, metadata=None, flagged=None):
        self.method = Method.parse(method)
        self.derivative_order = int(derivative_order)
        self.gamma = float(gamma)
        self.medcouple = float(medcouple)
        self.q3 = float(q3)
        self.iqr = float(iqr)
        self.threshold = float(threshold)
        self.meter_ids = [str(m) for m in meter_ids]
        self.distances = np.asarray(distances, dtype=float)
        self.prototype = np.asarray(prototype, dtype=float)
        self.metadata = dict(metadata or {})
        computed = self.distances > self.threshold
        if flagged is not None and not np.array_equal(np.asarray(flagged, dtype=bool), computed):
            raise DetectionError("Stored flags disagree with distances and threshold")
        self.flags = computed

    @property
    def flagged_ids(self):
        return [m for m, flag in zip(self.meter_ids, self.flags) if flag]

    def __repr__(self):
        return (f"DetectionReport({self.method.value}, deriv={self.derivative_order}, "
                f"threshold={self.threshold:.4g}, flagged={len(self.flagged_ids)})")

    def to_dict(self):
        return {
            'method': self.method.value,
            'derivative_order': self.derivative_order,
            'gamma': self.gamma,
            'medcouple': self.medcouple,
            'q3': self.q3,
            'iqr': self.iqr,
            'threshold': self.threshold,
            'meters': [
                {'id': m, 'distance': float(d), 'flagged': bool(f)}
                for m, d, f in zip(self.meter_ids, self.distances, self.flags)
            ],
            'prototype': [float(v) for v in self.prototype],
            'metadata': self.metadata,
        }

    @classmethod
    def from_dict(cls, data):
        meters = data['meters']
        return cls(
            method=data['method'],
            derivative_order=data['derivative_order'],
            gamma=data['gamma'],
            medcouple=data['medcouple'],
            q3=data['q3'],
            iqr=data['iqr'],
            threshold=data['threshold'],
            meter_ids=[m['id'] for m in meters],
            distances=[m['distance'] for m in meters],
            prototype=data['prototype'],
            metadata=data.get('metadata', {}),
            flagged=[m['flagged'] for m in meters],
        )

    def __eq__(self, other):
        return isinstance(other, DetectionReport) and self.to_dict() == other.to_dict()
