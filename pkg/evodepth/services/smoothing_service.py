import os
import logging

import numpy as np
from scipy import linalg
from scipy.interpolate import BSpline

from evodepth.errors import SmoothingError
from evodepth.models.panel import CurveSample
from evodepth.models.spline import SplineFit, DEGREE

logger = logging.getLogger(__name__)


def parse_basis_grid(text):
    """Parse '6-40' or '6,8,10' into a sorted list of basis sizes"""
    text = str(text).strip()
    try:
        if '-' in text:
            low, high = (int(part) for part in text.split('-', 1))
            values = list(range(low, high + 1))
        else:
            values = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise SmoothingError(f"Invalid basis grid {text!r}; use 'low-high' or a comma-separated list")
    if not values:
        raise SmoothingError(f"Basis grid {text!r} is empty")
    return sorted(set(values))


class SmoothingService:
    """Least-squares cubic B-spline smoothing and analytic first derivatives"""

    def __init__(self):
        """Initialize smoothing service with the K search range from environment variables"""
        self.basis_grid = parse_basis_grid(os.environ.get('EVODEPTH_BASIS_GRID', '6-40'))

    def knots(self, grid, n_basis):
        """Clamped cubic knot vector with uniformly spaced interior knots"""
        lower, upper = grid.points[0], grid.points[-1]
        interior = np.linspace(lower, upper, n_basis - DEGREE + 1)[1:-1]
        return np.concatenate([[lower] * (DEGREE + 1), interior, [upper] * (DEGREE + 1)])

    def basis_matrix(self, grid, n_basis):
        """p x K matrix of cubic B-spline basis functions evaluated on the grid"""
        self._check_basis(grid, n_basis)
        knots = self.knots(grid, n_basis)
        return knots, BSpline.design_matrix(grid.points, knots, DEGREE).toarray()

    def _check_basis(self, grid, n_basis):
        if not DEGREE + 1 <= n_basis <= grid.size:
            raise SmoothingError(f"Basis size must satisfy 4 <= K <= p = {grid.size}, got K = {n_basis}")

    def _solve(self, basis, values):
        """Least-squares coefficients (curves x K) through a QR decomposition of the basis"""
        q, r = linalg.qr(basis, mode='economic')
        diagonal = np.abs(np.diag(r))
        tolerance = diagonal.max() * max(basis.shape) * np.finfo(float).eps
        rank = int(np.sum(diagonal > tolerance))
        if rank < basis.shape[1]:
            raise SmoothingError(f"Ill-conditioned B-spline basis: rank {rank} < K = {basis.shape[1]}")
        return linalg.solve_triangular(r, q.T @ values.T).T

    def fit_bsplines(self, sample, n_basis):
        """
        Project each curve onto the K-dimensional cubic B-spline space

        Args:
            sample (CurveSample): Curves on a shared grid
            n_basis (int): Number of basis functions K, 4 <= K <= p

        Returns:
            SplineFit: Knots, coefficients and per-curve residual mean squared error
        """
        n_basis = int(n_basis)
        knots, basis = self.basis_matrix(sample.grid, n_basis)
        coefficients = self._solve(basis, sample.values)
        residuals = sample.values - coefficients @ basis.T
        mse = np.mean(residuals ** 2, axis=1)
        return SplineFit(knots, coefficients, sample.grid, mse, sample.labels)

    def evaluate(self, fit, points=None, order=0):
        """Evaluate the fitted curves (or a derivative) at points, default the source grid"""
        x = fit.grid.points if points is None else np.asarray(points, dtype=float)
        spline = fit.spline()
        if order:
            spline = spline.derivative(order)
        return spline(x).T

    def fitted(self, fit):
        """Fitted values on the source grid as a CurveSample"""
        return CurveSample(fit.grid, self.evaluate(fit), fit.labels)

    def derivative(self, fit, order=1):
        """
        Analytic derivative of the spline expansion on the source grid

        Args:
            fit (SplineFit): Fitted curves
            order (int): Derivative order; only 1 is supported

        Returns:
            CurveSample: Derivative curves
        """
        if order != 1:
            raise SmoothingError(f"Only first derivatives are supported, got order {order}")
        return CurveSample(fit.grid, self.evaluate(fit, order=1), fit.labels)

    def gcv_score(self, sample, n_basis):
        """Generalized cross-validation p * RSS / (p - K)^2, averaged over curves"""
        fit = self.fit_bsplines(sample, n_basis)
        p = sample.p
        if n_basis >= p:
            return np.inf
        rss = fit.mse * p
        return float(np.mean(p * rss / (p - n_basis) ** 2))

    def select_num_basis(self, sample, basis_grid=None):
        """
        Choose K minimizing the mean GCV score over curves; ties go to the smallest K

        Args:
            sample (CurveSample): Curves on a shared grid
            basis_grid (list, optional): Candidate K values, default from EVODEPTH_BASIS_GRID

        Returns:
            tuple: (selected K, dict of K -> GCV score)
        """
        candidates = sorted(set(int(k) for k in (basis_grid or self.basis_grid)))
        if basis_grid is None:
            # the configured range is a default; clip it to what the grid supports
            candidates = [k for k in candidates if DEGREE + 1 <= k <= sample.p] or [min(sample.p, DEGREE + 1)]
        if not candidates:
            raise SmoothingError("Basis grid is empty")
        for k in candidates:
            self._check_basis(sample.grid, k)
        if len(candidates) == 1:
            return candidates[0], {candidates[0]: self.gcv_score(sample, candidates[0])}

        scores = {k: self.gcv_score(sample, k) for k in candidates}
        best = min(scores.values())
        # rounding-level differences between exact fits count as ties
        tolerance = 1e-12 * max(float(np.mean(sample.values ** 2)), np.finfo(float).tiny)
        selected = min(k for k, score in scores.items() if score <= best + tolerance)
        logger.info(f"Selected K={selected} from {candidates[0]}..{candidates[-1]} (GCV {scores[selected]:.4g})")
        return selected, scores

    def smooth_panel(self, panel, n_basis='auto', derivative_order=0):
        """
        Smooth every daily curve of a panel with one global K, optionally differentiating

        Args:
            panel (MeterPanel): Panel to smooth
            n_basis (int or str): K, or 'auto' for GCV selection over the configured range
            derivative_order (int): 0 for fitted values, 1 for first derivatives

        Returns:
            tuple: (MeterPanel of smoothed values or derivatives, dict with K and GCV scores)
        """
        if derivative_order not in (0, 1):
            raise SmoothingError(f"Derivative order must be 0 or 1, got {derivative_order}")
        n_meters, n_days, p = panel.shape
        pooled = CurveSample(panel.grid, panel.values.reshape(n_meters * n_days, p))
        if str(n_basis).lower() == 'auto':
            n_basis, scores = self.select_num_basis(pooled)
        else:
            n_basis = int(n_basis)
            scores = {}
        fit = self.fit_bsplines(pooled, n_basis)
        if derivative_order == 1:
            smoothed = self.derivative(fit, 1).values
        else:
            smoothed = self.evaluate(fit)
        info = {
            'n_basis': int(n_basis),
            'derivative_order': int(derivative_order),
            'gcv_scores': {str(k): float(v) for k, v in scores.items()},
            'mean_mse': float(np.mean(fit.mse)),
        }
        logger.info(f"Smoothed panel with K={n_basis}, derivative order {derivative_order}")
        return panel.with_values(smoothed.reshape(n_meters, n_days, p)), info
