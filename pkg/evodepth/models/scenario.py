from enum import Enum

import numpy as np

from evodepth.errors import SimulationError
from evodepth.models.base import BaseModel
from evodepth.models.panel import Grid

OUTLIER_FRACTIONS = (0.01, 0.05, 0.10)
RNG_NAME = 'numpy.random.PCG64'


class SimModel(str, Enum):
    MODEL1 = 'Model1'
    MODEL2 = 'Model2'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace('model', '')
        if key == '1':
            return cls.MODEL1
        if key == '2':
            return cls.MODEL2
        raise SimulationError(f"Unknown simulation model: {value}")


class GpConfig:
    """Zero-mean Gaussian process with covariance eta * exp(-lambda * |x - x'|) on a grid"""

    def __init__(self, eta, lam, grid):
        if eta < 0:
            raise SimulationError(f"eta must be >= 0, got {eta}")
        if lam <= 0:
            raise SimulationError(f"lambda must be > 0, got {lam}")
        self.eta = float(eta)
        self.lam = float(lam)
        self.grid = grid

    def covariance(self):
        x = self.grid.points
        return self.eta * np.exp(-self.lam * np.abs(x[:, None] - x[None, :]))

    def __repr__(self):
        return f"GpConfig(eta={self.eta}, lambda={self.lam}, p={self.grid.size})"


class SimScenario(BaseModel):
    """Full parameterization of one Model 1 / Model 2 panel"""

    def __init__(self, model=SimModel.MODEL1, n_meters=100, n_days=50, p=50,
                 outlier_fraction=0.05, rho=5, eta_eps=0.8, lam=0.1,
                 eta_ups=1.5, eta_ups_outlier=0.5, seed=0):
        self.model = SimModel.parse(model)
        self.n_meters = int(n_meters)
        self.n_days = int(n_days)
        self.p = int(p)
        self.outlier_fraction = float(outlier_fraction)
        self.rho = int(rho)
        self.eta_eps = float(eta_eps)
        self.lam = float(lam)
        self.eta_ups = float(eta_ups)
        self.eta_ups_outlier = float(eta_ups_outlier)
        self.seed = int(seed)
        self.validate()

    def validate(self):
        if self.n_meters < 1:
            raise SimulationError(f"N >= 1 required, got {self.n_meters}")
        if self.p < 2:
            raise SimulationError(f"p >= 2 required, got {self.p}")
        if self.n_days < 2:
            raise SimulationError(f"T >= 2 required, got T = {self.n_days}")
        if self.model == SimModel.MODEL1 and self.n_days <= self.rho:
            raise SimulationError(f"Model 1 needs T > rho, got T = {self.n_days}, rho = {self.rho}")
        if self.rho < 1:
            raise SimulationError(f"rho >= 1 required, got {self.rho}")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise SimulationError(f"Outlier fraction must lie in [0, 1), got {self.outlier_fraction}")
        for name in ('eta_eps', 'eta_ups', 'eta_ups_outlier'):
            if getattr(self, name) < 0:
                raise SimulationError(f"{name} must be >= 0")
        if self.lam <= 0:
            raise SimulationError(f"lambda must be > 0, got {self.lam}")

    @property
    def n_outliers(self):
        # round half up: 50 x 0.01 gives 1
        return int(np.floor(self.n_meters * self.outlier_fraction + 0.5))

    @property
    def grid(self):
        return Grid.uniform(self.p)

    def with_seed(self, seed):
        data = self.to_dict()
        data['seed'] = seed
        return SimScenario.from_dict(data)

    def to_dict(self):
        return {
            'model': self.model.value,
            'n_meters': self.n_meters,
            'n_days': self.n_days,
            'p': self.p,
            'outlier_fraction': self.outlier_fraction,
            'n_outliers': self.n_outliers,
            'rho': self.rho,
            'eta_eps': self.eta_eps,
            'lambda_eps': self.lam,
            'lambda_ups': self.lam,
            'eta_ups': self.eta_ups,
            'eta_ups_outlier': self.eta_ups_outlier,
            'seed': self.seed,
            'rng': RNG_NAME,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            model=data['model'],
            n_meters=data['n_meters'],
            n_days=data['n_days'],
            p=data['p'],
            outlier_fraction=data['outlier_fraction'],
            rho=data.get('rho', 5),
            eta_eps=data.get('eta_eps', 0.8),
            lam=data.get('lambda_eps', data.get('lam', 0.1)),
            eta_ups=data.get('eta_ups', 1.5),
            eta_ups_outlier=data.get('eta_ups_outlier', 0.5),
            seed=data.get('seed', 0),
        )

    def __repr__(self):
        return (f"SimScenario({self.model.value}, N={self.n_meters}, T={self.n_days}, p={self.p}, "
                f"fraction={self.outlier_fraction}, seed={self.seed})")


class LabeledPanel:
    """A simulated panel together with its planted outlier flags"""

    def __init__(self, panel, outlier_flags, scenario=None, details=None):
        flags = np.asarray(outlier_flags, dtype=bool)
        if flags.size != panel.n_meters:
            raise SimulationError(f"Got {flags.size} flags for {panel.n_meters} meters")
        self.panel = panel
        self.outlier_flags = flags
        self.scenario = scenario
        # per-outlier generation details, e.g. Model 1 trend windows
        self.details = details or {}

    @property
    def outlier_ids(self):
        return [m for m, flag in zip(self.panel.meter_ids, self.outlier_flags) if flag]

    def __repr__(self):
        return f"LabeledPanel({self.panel!r}, outliers={int(self.outlier_flags.sum())})"
