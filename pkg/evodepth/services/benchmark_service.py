import os
import logging
import concurrent.futures

import numpy as np
import pandas as pd

from evodepth.errors import DetectionError
from evodepth.models.benchmark import BenchmarkResult
from evodepth.models.report import Method
from evodepth.models.scenario import SimModel, SimScenario, OUTLIER_FRACTIONS
from evodepth.services.detection_service import DetectionService
from evodepth.services.simulation_service import SimulationService

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ['model', 'fraction', 'method', 'replicates', 'tpr_mean', 'tnr_mean']


def tpr_tnr(flags, truth):
    """
    True positive and true negative rates of a flag vector against planted labels

    Args:
        flags (array-like): Detected outliers (bool per meter)
        truth (array-like): Planted outliers (bool per meter)

    Returns:
        tuple: (TPR, TNR)
    """
    flags = np.asarray(flags, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if flags.shape != truth.shape:
        raise DetectionError(f"Got {flags.size} flags for {truth.size} labels")
    positives = int(truth.sum())
    negatives = truth.size - positives
    if positives == 0 or negatives == 0:
        raise DetectionError("Truth must contain at least one outlier and one non-outlier")
    tpr = int(np.sum(flags & truth)) / positives
    tnr = int(np.sum(~flags & ~truth)) / negatives
    return tpr, tnr


class BenchmarkService:
    """Replicated simulation studies reporting mean TPR and TNR per method and outlier fraction"""

    def __init__(self):
        """Initialize benchmark service with configuration from environment variables"""
        self.simulation_service = SimulationService()
        self.detection_service = DetectionService()
        self.replicates = int(os.environ.get('EVODEPTH_REPLICATES', 20))
        self.parallel = os.environ.get('EVODEPTH_PARALLEL', 'true').lower() == 'true'
        self.max_workers = int(os.environ.get('EVODEPTH_MAX_WORKERS', 4))
        if self.parallel:
            # replicates already run on the pool; keep per-meter depth work sequential
            self.detection_service.parallel = False

    def _replicate(self, scenario, methods, gamma):
        """Generate one panel and score every method on it"""
        labeled = self.simulation_service.generate(scenario)
        scores = {}
        for method in methods:
            report = self.detection_service.detect(labeled.panel, method=method, gamma=gamma)
            scores[method] = tpr_tnr(report.flags, labeled.outlier_flags)
        return scores

    def run_benchmark(self, model, fractions=OUTLIER_FRACTIONS, methods=(Method.TDEPTH, Method.STDEPTH),
                      replicates=None, base_seed=0, n_meters=100, n_days=50, p=50, rho=5, gamma=None):
        """
        Replicate a simulation study

        Args:
            model (int or SimModel): Simulation model 1 or 2
            fractions (list): Outlier fractions, each a table column
            methods (list): Detection methods, each a table row
            replicates (int, optional): Panels per fraction, default from EVODEPTH_REPLICATES
            base_seed (int): Replicate r uses seed base_seed + r
            n_meters (int): Typical meters N
            n_days (int): Days T
            p (int): Grid points per day
            rho (int): Model 1 trend length
            gamma (float, optional): Whisker factor

        Returns:
            list: BenchmarkResult per (method, fraction), methods outermost
        """
        model = SimModel.parse(model)
        methods = [Method.parse(m) for m in methods]
        replicates = self.replicates if replicates is None else int(replicates)
        if replicates < 1:
            raise DetectionError(f"At least one replicate required, got {replicates}")

        results = []
        per_fraction = {}
        for fraction in fractions:
            scenarios = [
                SimScenario(model=model, n_meters=n_meters, n_days=n_days, p=p, outlier_fraction=fraction,
                            rho=rho, seed=base_seed + r)
                for r in range(replicates)
            ]
            scores = [None] * replicates
            if self.parallel and replicates > 1 and self.max_workers > 1:
                with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                    future_to_index = {
                        executor.submit(self._replicate, scenario, methods, gamma): r
                        for r, scenario in enumerate(scenarios)
                    }
                    for future in concurrent.futures.as_completed(future_to_index):
                        scores[future_to_index[future]] = future.result()
            else:
                scores = [self._replicate(scenario, methods, gamma) for scenario in scenarios]
            per_fraction[fraction] = (scenarios, scores)
            logger.info(f"{model.value}, fraction {fraction}: {replicates} replicates done")

        for method in methods:
            for fraction in fractions:
                scenarios, scores = per_fraction[fraction]
                results.append(BenchmarkResult(
                    model=model.value,
                    fraction=fraction,
                    method=method.value,
                    tpr_values=[s[method][0] for s in scores],
                    tnr_values=[s[method][1] for s in scores],
                    seeds=[scenario.seed for scenario in scenarios],
                ))
        return results

    def results_frame(self, results):
        """Machine-readable table: model,fraction,method,replicates,tpr_mean,tnr_mean"""
        return pd.DataFrame([{column: r.to_dict()[column] for column in TABLE_COLUMNS} for r in results],
                            columns=TABLE_COLUMNS)

    def write_csv(self, results, path):
        self.results_frame(results).to_csv(path, index=False)

    def format_table(self, results):
        """Aligned text table: one row per method, a TPR/TNR pair per outlier fraction"""
        if not results:
            return ''
        fractions = sorted({r.fraction for r in results})
        methods = list(dict.fromkeys(r.method for r in results))
        cells = {(r.method, r.fraction): r for r in results}
        header = ['Method'] + [f"{f:.0%} TPR  TNR" for f in fractions]
        rows = []
        for method in methods:
            row = [method]
            for fraction in fractions:
                result = cells.get((method, fraction))
                row.append('-' if result is None else f"{result.tpr_mean:.3f} {result.tnr_mean:.3f}")
            rows.append(row)
        widths = [max(len(line[i]) for line in [header] + rows) for i in range(len(header))]
        lines = [f"{results[0].model} (R={results[0].replicates})"]
        for line in [header] + rows:
            lines.append(' | '.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
        return '\n'.join(lines)
