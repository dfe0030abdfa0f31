import math

from evodepth.errors import DetectionError
from evodepth.models.base import BaseModel


class BenchmarkResult(BaseModel):
    """One cell of a results table: mean TPR/TNR of a method over replicates"""

    def __init__(self, model, fraction, method, tpr_values, tnr_values, seeds):
        if not tpr_values or len(tpr_values) != len(tnr_values) or len(tpr_values) != len(seeds):
            raise DetectionError("Benchmark needs one TPR, TNR and seed per replicate")
        for value in list(tpr_values) + list(tnr_values):
            if not 0.0 <= value <= 1.0:
                raise DetectionError(f"TPR/TNR must lie in [0, 1], got {value}")
        self.model = model
        self.fraction = float(fraction)
        self.method = method
        self.tpr_values = [float(v) for v in tpr_values]
        self.tnr_values = [float(v) for v in tnr_values]
        self.seeds = [int(s) for s in seeds]

    @property
    def replicates(self):
        return len(self.seeds)

    @property
    def tpr_mean(self):
        return math.fsum(self.tpr_values) / self.replicates

    @property
    def tnr_mean(self):
        return math.fsum(self.tnr_values) / self.replicates

    def __repr__(self):
        return (f"BenchmarkResult({self.model}, fraction={self.fraction}, {self.method}, "
                f"R={self.replicates}, TPR={self.tpr_mean:.3f}, TNR={self.tnr_mean:.3f})")

    def to_dict(self):
        return {
            'model': self.model,
            'fraction': self.fraction,
            'method': self.method,
            'replicates': self.replicates,
            'tpr_mean': self.tpr_mean,
            'tnr_mean': self.tnr_mean,
            'tpr_values': self.tpr_values,
            'tnr_values': self.tnr_values,
            'seeds': self.seeds,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            model=data['model'],
            fraction=data['fraction'],
            method=data['method'],
            tpr_values=data['tpr_values'],
            tnr_values=data['tnr_values'],
            seeds=data['seeds'],
        )
