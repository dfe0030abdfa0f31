import os
import logging

import numpy as np

from evodepth.errors import SimulationError
from evodepth.models.panel import MeterPanel
from evodepth.models.scenario import GpConfig, SimModel, LabeledPanel, RNG_NAME
from evodepth.services.storage_service import StorageService

logger = logging.getLogger(__name__)

JITTER = 1e-10
MAX_JITTER = 1e-4


def make_rng(seed):
    """PCG64 generator seeded through a SeedSequence, identical across platforms"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


class SimulationService:
    """Seeded synthetic panels of grouped meters with planted evolution outliers"""

    def __init__(self):
        """Initialize simulation service"""
        self.storage_service = StorageService()
        self._factors = {}

    def _cholesky(self, cfg):
        """Lower factor of the covariance with relative diagonal jitter, escalated on failure"""
        key = (cfg.eta, cfg.lam, cfg.grid.points.tobytes())
        if key in self._factors:
            return self._factors[key]
        covariance = cfg.covariance()
        scale = float(np.mean(np.diag(covariance)))
        jitter = JITTER
        while True:
            try:
                factor = np.linalg.cholesky(covariance + jitter * scale * np.eye(cfg.grid.size))
                break
            except np.linalg.LinAlgError:
                jitter *= 10
                if jitter > MAX_JITTER:
                    raise SimulationError(f"Covariance factorization failed for {cfg!r}")
                logger.warning(f"Cholesky failed, raising jitter to {jitter:g}")
        self._factors[key] = factor
        return factor

    def gp_sample(self, cfg, rng, size=None):
        """
        Draw zero-mean Gaussian process curves with exponential covariance on the grid

        Args:
            cfg (GpConfig): Variance scale, decay and grid
            rng (numpy.random.Generator): Source of randomness
            size (int, optional): Number of curves; a single curve when omitted

        Returns:
            numpy.ndarray: Curve of length p, or size x p matrix
        """
        count = 1 if size is None else int(size)
        p = cfg.grid.size
        if cfg.eta == 0:
            draws = np.zeros((count, p))
        else:
            normals = rng.standard_normal((count, p))
            draws = normals @ self._cholesky(cfg).T
        return draws[0] if size is None else draws

    def _meter_ids(self, total):
        width = max(3, len(str(total - 1)))
        return [f"m{i:0{width}d}" for i in range(total)]

    def generate(self, scenario):
        """Generate the panel of a scenario under its model"""
        if scenario.model is SimModel.MODEL1:
            return self.generate_model1(scenario)
        return self.generate_model2(scenario)

    def generate_model1(self, scenario):
        """
        Common daily group effect plus a per-meter effect; outliers carry a linear
        trend between two of their own days

        Args:
            scenario (SimScenario): Model 1 scenario

        Returns:
            LabeledPanel: N typical meters followed by round(N x fraction) outliers
        """
        if scenario.model is not SimModel.MODEL1:
            raise SimulationError(f"generate_model1 needs a Model1 scenario, got {scenario.model.value}")
        scenario.validate()
        rng = make_rng(scenario.seed)
        grid = scenario.grid
        n_typical, n_outliers = scenario.n_meters, scenario.n_outliers
        n_days, rho = scenario.n_days, scenario.rho

        mean = np.sin(2 * np.pi * grid.points)
        day_effects = self.gp_sample(GpConfig(scenario.eta_eps, scenario.lam, grid), rng, n_days)
        typical_effects = self.gp_sample(GpConfig(scenario.eta_ups, scenario.lam, grid), rng, n_typical)
        outlier_effects = self.gp_sample(GpConfig(scenario.eta_ups_outlier, scenario.lam, grid), rng, n_outliers)
        # 1-based start days drawn from 1..T-rho
        starts = rng.integers(1, n_days - rho + 1, size=n_outliers)

        base = mean[None, :] + day_effects
        values = np.empty((n_typical + n_outliers, n_days, grid.size))
        values[:n_typical] = base[None, :, :] + typical_effects[:, None, :]

        meter_ids = self._meter_ids(n_typical + n_outliers)
        windows = {}
        for j in range(n_outliers):
            curves = base + outlier_effects[j][None, :]
            t_a = int(starts[j])
            t_b = t_a + rho
            first, last = curves[t_a - 1].copy(), curves[t_b - 1].copy()
            for t in range(t_a, t_b + 1):
                curves[t - 1] = ((t_b - t) * first + (t - t_a) * last) / (t_b - t_a)
            values[n_typical + j] = curves
            windows[meter_ids[n_typical + j]] = {'t_a': t_a, 't_b': t_b}

        flags = np.arange(n_typical + n_outliers) >= n_typical
        panel = MeterPanel(meter_ids, list(range(1, n_days + 1)), grid, values)
        logger.info(f"Generated {scenario!r} with {n_outliers} trend outliers")
        details = {
            'trend_windows': windows,
            'day_effects': day_effects,
            'meter_effects': np.vstack([typical_effects, outlier_effects]),
        }
        return LabeledPanel(panel, flags, scenario, details)

    def trend_weights(self, n_days):
        """Weights (T - t) / (T - 1) for t = 1..T"""
        t = np.arange(1, n_days + 1)
        return (n_days - t) / (n_days - 1)

    def generate_model2(self, scenario):
        """
        Common linear trend between two group curves plus a per-meter effect;
        outliers follow the same trend with its direction inverted

        Args:
            scenario (SimScenario): Model 2 scenario

        Returns:
            LabeledPanel: N typical meters followed by round(N x fraction) outliers
        """
        if scenario.model is not SimModel.MODEL2:
            raise SimulationError(f"generate_model2 needs a Model2 scenario, got {scenario.model.value}")
        scenario.validate()
        rng = make_rng(scenario.seed)
        grid = scenario.grid
        n_typical, n_outliers, n_days = scenario.n_meters, scenario.n_outliers, scenario.n_days

        mean = np.sin(2 * np.pi * grid.points)
        eps_first, eps_last = self.gp_sample(GpConfig(scenario.eta_eps, scenario.lam, grid), rng, 2)
        meter_effects = self.gp_sample(GpConfig(scenario.eta_ups, scenario.lam, grid), rng,
                                       n_typical + n_outliers)

        w = self.trend_weights(n_days)[:, None]
        trend = w * eps_first + (1 - w) * eps_last
        inverted = (1 - w) * eps_first + w * eps_last

        values = np.empty((n_typical + n_outliers, n_days, grid.size))
        values[:n_typical] = (mean + trend)[None, :, :] + meter_effects[:n_typical, None, :]
        values[n_typical:] = (mean + inverted)[None, :, :] + meter_effects[n_typical:, None, :]

        flags = np.arange(n_typical + n_outliers) >= n_typical
        panel = MeterPanel(self._meter_ids(n_typical + n_outliers), list(range(1, n_days + 1)), grid, values)
        logger.info(f"Generated {scenario!r} with {n_outliers} trend-inverted outliers")
        details = {
            'eps_first': eps_first,
            'eps_last': eps_last,
            'meter_effects': meter_effects,
        }
        return LabeledPanel(panel, flags, scenario, details)

    def write_simulation(self, labeled, directory, metadata=None):
        """
        Persist a simulated panel: archive files, labels.csv and scenario.json

        Args:
            labeled (LabeledPanel): Generated panel with flags and scenario
            directory (str): Output directory
            metadata (dict, optional): Run metadata (version, timestamp, ...)
        """
        self.storage_service.write_panel_archive(labeled.panel, directory)
        self.storage_service.write_labels(labeled.panel.meter_ids, labeled.outlier_flags,
                                          os.path.join(directory, 'labels.csv'))
        scenario = labeled.scenario.to_dict() if labeled.scenario is not None else {}
        scenario['trend_windows'] = labeled.details.get('trend_windows', {})
        scenario['rng'] = RNG_NAME
        scenario['metadata'] = metadata or {}
        self.storage_service.write_json(scenario, os.path.join(directory, 'scenario.json'))
        logger.info(f"Wrote simulation to {directory}")
