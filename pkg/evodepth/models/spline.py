import numpy as np
from scipy.interpolate import BSpline

from evodepth.errors import SmoothingError

DEGREE = 3


class SplineFit:
    """Cubic B-spline expansion of a set of curves on a clamped knot vector"""

    def __init__(self, knots, coefficients, grid, mse, labels=None):
        knots = np.asarray(knots, dtype=float)
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        n_basis = knots.size - DEGREE - 1
        if n_basis < DEGREE + 1:
            raise SmoothingError(f"K >= 4 required, got K = {n_basis}")
        if np.any(np.diff(knots) < 0):
            raise SmoothingError("Knots must be nondecreasing")
        if coefficients.shape[1] != n_basis:
            raise SmoothingError(
                f"Coefficient matrix has {coefficients.shape[1]} columns, expected K = {n_basis}"
            )
        if not np.all(np.isfinite(coefficients)):
            raise SmoothingError("Spline coefficients must be finite")
        self.knots = knots
        self.coefficients = coefficients
        self.grid = grid
        self.mse = np.asarray(mse, dtype=float)
        self.labels = list(labels) if labels is not None else list(range(1, coefficients.shape[0] + 1))

    @property
    def n_basis(self):
        return self.coefficients.shape[1]

    @property
    def n_curves(self):
        return self.coefficients.shape[0]

    def spline(self):
        """Vector-valued scipy BSpline, one output per curve"""
        return BSpline(self.knots, self.coefficients.T, DEGREE, extrapolate=False)

    def __repr__(self):
        return f"SplineFit(K={self.n_basis}, curves={self.n_curves})"
