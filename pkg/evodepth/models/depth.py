from enum import Enum

import numpy as np

from evodepth.errors import DepthError


class DepthKind(str, Enum):
    MBD = 'MBD'
    MEI = 'MEI'
    SCALED_MBD = 'ScaledMBD'

    @classmethod
    def parse(cls, value):
        """Accept enum members or case-insensitive names ('mbd', 'scaled_mbd', 'ScaledMBD')"""
        if isinstance(value, cls):
            return value
        key = str(value).replace('_', '').lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise DepthError(f"Unknown depth kind: {value}")


class DepthValues:
    """Per-curve depth values aligned with the labels of a CurveSample"""

    def __init__(self, values, labels, kind):
        values = np.array(values, dtype=float, copy=True)
        values.flags.writeable = False
        self.values = values
        self.labels = list(labels)
        self.kind = DepthKind.parse(kind)

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __repr__(self):
        return f"DepthValues(kind={self.kind.value}, n={len(self)})"

    def as_dict(self):
        return {label: float(v) for label, v in zip(self.labels, self.values)}
