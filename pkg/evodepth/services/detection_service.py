import os
import math
import logging
import concurrent.futures

import numpy as np
from statsmodels.stats.stattools import medcouple as _medcouple

from evodepth.errors import DetectionError, DepthError
from evodepth.models.depth import DepthKind
from evodepth.models.panel import Grid, CurveSample
from evodepth.models.report import Method, DepthPanel, Prototype, DetectionReport
from evodepth.services.depth_service import DepthService
from evodepth.services.smoothing_service import SmoothingService

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 0.72


class DetectionService:
    """
    Evolution-outlier detection on time series of functional depths (TDEPTH)
    or scaled depths (STDEPTH)
    """

    def __init__(self):
        """Initialize detection service with configuration from environment variables"""
        self.depth_service = DepthService()
        self.smoothing_service = SmoothingService()
        self.gamma = float(os.environ.get('EVODEPTH_GAMMA', DEFAULT_GAMMA))
        self.parallel = os.environ.get('EVODEPTH_PARALLEL', 'true').lower() == 'true'
        self.max_workers = int(os.environ.get('EVODEPTH_MAX_WORKERS', 4))

    def depth_series(self, panel, kind=DepthKind.MBD):
        """
        Depth of each day's curve within the meter's own T daily curves, per meter

        Args:
            panel (MeterPanel): N x T x p panel
            kind (DepthKind): MBD or ScaledMBD

        Returns:
            DepthPanel: N x T matrix of depth series
        """
        kind = DepthKind.parse(kind)
        if kind is DepthKind.MEI:
            raise DetectionError("Depth series are built from MBD or ScaledMBD, not MEI")
        if panel.n_days < 2:
            raise DepthError(f"T >= 2 required, got T = {panel.n_days}")

        def row(i):
            return self.depth_service.depth_values(panel.meter_sample(i), kind).values

        matrix = np.empty((panel.n_meters, panel.n_days))
        if self.parallel and panel.n_meters > 1 and self.max_workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                future_to_meter = {executor.submit(row, i): i for i in range(panel.n_meters)}
                for future in concurrent.futures.as_completed(future_to_meter):
                    matrix[future_to_meter[future]] = future.result()
        else:
            for i in range(panel.n_meters):
                matrix[i] = row(i)
        return DepthPanel(matrix, kind, panel.meter_ids, panel.day_index)

    def _ranked_rows(self, matrix):
        """Rows ordered deepest first, treating each depth series as a curve over days"""
        sample = CurveSample(Grid.uniform(matrix.shape[1]), matrix)
        return self.depth_service.rank_by_depth(sample)

    def prototype(self, depth_panel):
        """
        Robust group evolution: mean of the ceil(N/2) deepest depth series

        Args:
            depth_panel (DepthPanel): Per-meter depth series

        Returns:
            Prototype: Trimmed-mean series with its members
        """
        if depth_panel.n_meters < 2:
            raise DetectionError(f"N >= 2 required for the prototype, got N = {depth_panel.n_meters}")
        order = self._ranked_rows(depth_panel.matrix)
        trim_count = math.ceil(depth_panel.n_meters / 2)
        deepest = order[:trim_count]
        series = depth_panel.matrix[deepest].mean(axis=0)
        return Prototype(series, trim_count, [depth_panel.meter_ids[i] for i in deepest])

    def distances(self, depth_panel, prototype):
        """Euclidean distance of every depth series to the prototype"""
        if depth_panel.n_days != len(prototype):
            raise DetectionError(
                f"Prototype has {len(prototype)} days, depth panel has {depth_panel.n_days}"
            )
        return np.sqrt(np.sum((depth_panel.matrix - prototype.series[None, :]) ** 2, axis=1))

    def leave_one_out_distances(self, depth_panel):
        """Distance of each series to the prototype of the other N - 1 series"""
        if depth_panel.n_meters < 3:
            raise DetectionError("Leave-one-out prototypes need N >= 3")
        result = np.empty(depth_panel.n_meters)
        for i in range(depth_panel.n_meters):
            others = np.delete(depth_panel.matrix, i, axis=0)
            ids = [m for j, m in enumerate(depth_panel.meter_ids) if j != i]
            proto = self.prototype(DepthPanel(others, depth_panel.kind, ids, depth_panel.day_index))
            result[i] = np.sqrt(np.sum((depth_panel.matrix[i] - proto.series) ** 2))
        return result

    def medcouple(self, d):
        """
        Medcouple of a sample: median of the kernel over pairs straddling the median

        Args:
            d (array-like): At least 3 values

        Returns:
            float: Robust skewness in [-1, 1]
        """
        d = np.asarray(d, dtype=float)
        if d.size < 3:
            raise DetectionError(f"Medcouple needs n >= 3 values, got {d.size}")
        if np.all(d == d[0]):
            return 0.0
        return float(_medcouple(d))

    def quartiles(self, d):
        """Q1 and Q3 by linear interpolation between order statistics"""
        q1, q3 = np.quantile(np.asarray(d, dtype=float), [0.25, 0.75], method='linear')
        return float(q1), float(q3)

    def cutoff(self, d, gamma=None):
        """
        Skewness-adjusted boxplot cutoff with all its ingredients

        Returns:
            dict: q1, q3, iqr, medcouple and threshold
        """
        gamma = self.gamma if gamma is None else float(gamma)
        d = np.asarray(d, dtype=float)
        if d.size < 4:
            raise DetectionError(f"Threshold needs n >= 4 distances, got {d.size}")
        q1, q3 = self.quartiles(d)
        iqr = q3 - q1
        mc = self.medcouple(d)
        if iqr == 0:
            logger.warning("Distances have zero IQR; flagging only values strictly above Q3")
            threshold = q3
        else:
            threshold = q3 + gamma * math.exp(3 * mc) * iqr
        if mc < 0:
            logger.warning(f"Negative medcouple {mc:.4f}; upper whisker still uses exp(3 MC)")
        return {'q1': q1, 'q3': q3, 'iqr': iqr, 'medcouple': mc, 'threshold': threshold, 'gamma': gamma}

    def threshold(self, d, gamma=None):
        """Q3 + gamma * exp(3 MC) * IQR of the distances"""
        return self.cutoff(d, gamma)['threshold']

    def detect(self, panel, method=Method.TDEPTH, derivative_order=0, gamma=None,
               basis=None, leave_one_out=False, metadata=None):
        """Run the pipeline and return only the report (see analyse)"""
        report, _, _ = self.analyse(panel, method, derivative_order, gamma, basis, leave_one_out, metadata)
        return report

    def analyse(self, panel, method=Method.TDEPTH, derivative_order=0, gamma=None,
                basis=None, leave_one_out=False, metadata=None):
        """
        Run the full pipeline: optional smoothing, depth series, prototype,
        distances, cutoff and flags

        Args:
            panel (MeterPanel): Panel to analyse
            method (Method): TDEPTH (MBD series) or STDEPTH (scaled MBD series)
            derivative_order (int): 0 for level curves, 1 for first derivatives
            gamma (float, optional): Whisker factor, default from EVODEPTH_GAMMA
            basis (int or str, optional): B-spline K or 'auto'; smoothing is always
                applied for derivative_order 1
            leave_one_out (bool): Measure each meter against the prototype of the others
            metadata (dict, optional): Extra metadata carried into the report

        Returns:
            tuple: (DetectionReport, DepthPanel, Prototype)
        """
        method = Method.parse(method)
        if derivative_order not in (0, 1):
            raise DetectionError(f"Derivative order must be 0 or 1, got {derivative_order}")
        gamma = self.gamma if gamma is None else float(gamma)
        run_metadata = {
            'n_meters': panel.n_meters,
            'n_days': panel.n_days,
            'grid_size': panel.grid.size,
            'prototype_ranking': 'MBD of depth series over days',
            'quantile_method': 'linear',
            'leave_one_out': bool(leave_one_out),
        }

        if derivative_order == 1 or basis is not None:
            panel, smoothing = self.smoothing_service.smooth_panel(panel, basis or 'auto', derivative_order)
            run_metadata['smoothing'] = smoothing

        depth_panel = self.depth_series(panel, method.depth_kind)
        proto = self.prototype(depth_panel)
        if leave_one_out:
            d = self.leave_one_out_distances(depth_panel)
        else:
            d = self.distances(depth_panel, proto)
        cut = self.cutoff(d, gamma)
        run_metadata['q1'] = cut['q1']
        run_metadata['negative_medcouple'] = cut['medcouple'] < 0
        run_metadata['prototype_members'] = proto.members
        run_metadata.update(metadata or {})

        report = DetectionReport(
            method=method,
            derivative_order=derivative_order,
            gamma=gamma,
            medcouple=cut['medcouple'],
            q3=cut['q3'],
            iqr=cut['iqr'],
            threshold=cut['threshold'],
            meter_ids=depth_panel.meter_ids,
            distances=d,
            prototype=proto.series,
            metadata=run_metadata,
        )
        logger.info(f"{method.value} (derivative {derivative_order}) flagged "
                    f"{len(report.flagged_ids)} of {panel.n_meters} meters, threshold {report.threshold:.4g}")
        return report, depth_panel, proto
