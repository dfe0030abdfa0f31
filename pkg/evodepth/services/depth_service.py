"""
Functional depth kernels evaluated pointwise on the shared grid.

Band and epigraph indicators only depend on the pointwise order of the
curves, so every statistic is accumulated as exact integer counts and
divided once at the end. Ties between curves are resolved on those
integers, which keeps rankings reproducible bit for bit.
"""
import logging

import numpy as np

from evodepth.errors import DepthError
from evodepth.models.depth import DepthKind, DepthValues

logger = logging.getLogger(__name__)

# rows of the n x n x p comparison cube evaluated at once
_BLOCK = 64


class DepthService:
    """Modified band depth, modified epigraph index, scaled depth and depth rankings"""

    def _order_counts(self, sample):
        """
        Count, for every curve and grid point, the curves strictly below and strictly above it

        Returns:
            tuple: (below, above) integer arrays of shape n x p
        """
        values = sample.values
        n = values.shape[0]
        if n < 2:
            raise DepthError(f"Depth needs n >= 2 curves, got n = {n}")
        below = np.empty(values.shape, dtype=np.int64)
        above = np.empty(values.shape, dtype=np.int64)
        for start in range(0, n, _BLOCK):
            block = values[start:start + _BLOCK]
            below[start:start + _BLOCK] = (values[None, :, :] < block[:, None, :]).sum(axis=1)
            above[start:start + _BLOCK] = (values[None, :, :] > block[:, None, :]).sum(axis=1)
        return below, above

    @staticmethod
    def _pairs(m):
        return m * (m - 1) // 2

    def _band_counts(self, below, above, n):
        """Number of unordered pairs whose band contains the curve, per grid point"""
        # a pair misses the curve only if both members lie strictly on the same side
        return self._pairs(n) - self._pairs(below) - self._pairs(above)

    def _totals(self, sample):
        """Integer totals behind MBD and MEI: band memberships and weak-epigraph counts"""
        below, above = self._order_counts(sample)
        n = sample.n
        band_total = self._band_counts(below, above, n).sum(axis=1)
        epigraph_total = (n - below).sum(axis=1)
        return band_total, epigraph_total

    def mbd(self, sample):
        """
        Modified band depth: mean fraction of the grid on which a curve lies inside
        the band of each unordered pair of sample curves (inclusive bounds)

        Args:
            sample (CurveSample): n >= 2 curves

        Returns:
            DepthValues: MBD per curve, in [0, 1]
        """
        band_total, _ = self._totals(sample)
        depth = band_total / (self._pairs(sample.n) * sample.p)
        return DepthValues(depth, sample.labels, DepthKind.MBD)

    def pointwise_mbd(self, sample):
        """Fraction of bands containing each curve at each grid point (n x p)"""
        below, above = self._order_counts(sample)
        return self._band_counts(below, above, sample.n) / self._pairs(sample.n)

    def mei(self, sample):
        """
        Modified epigraph index: mean fraction of curves lying weakly above a curve

        Args:
            sample (CurveSample): n >= 2 curves

        Returns:
            DepthValues: MEI per curve, in (0, 1]
        """
        _, epigraph_total = self._totals(sample)
        index = epigraph_total / (sample.n * sample.p)
        return DepthValues(index, sample.labels, DepthKind.MEI)

    def _ranking(self, band_total, epigraph_total, n, p):
        """Deepest first; ties by MEI closest to 0.5, then by position in the sample"""
        centrality = np.abs(2 * epigraph_total - n * p)
        positions = np.arange(band_total.size)
        return np.lexsort((positions, centrality, -band_total))

    def rank_by_depth(self, sample):
        """
        Order curves from deepest to most outlying

        Args:
            sample (CurveSample): n >= 2 curves

        Returns:
            numpy.ndarray: Permutation of curve positions, deepest first
        """
        band_total, epigraph_total = self._totals(sample)
        return self._ranking(band_total, epigraph_total, sample.n, sample.p)

    def functional_median(self, sample):
        """Position of the deepest curve (the functional median)"""
        return int(self.rank_by_depth(sample)[0])

    def scaled_mbd(self, sample):
        """
        Scaled depth: MBD re-centred at the functional median and signed by the
        relative epigraph index, negative below the median and positive above it

        Args:
            sample (CurveSample): n >= 2 curves

        Returns:
            DepthValues: Scaled MBD per curve, in [-1, 1], 0 at the median
        """
        band_total, epigraph_total = self._totals(sample)
        median = int(self._ranking(band_total, epigraph_total, sample.n, sample.p)[0])
        sign = np.sign(epigraph_total[median] - epigraph_total)
        depth = sign * (band_total[median] - band_total) / (self._pairs(sample.n) * sample.p)
        ambiguous = np.flatnonzero((sign == 0) & (band_total != band_total[median]))
        if ambiguous.size:
            logger.debug(f"{ambiguous.size} curves share the median's epigraph index; scaled depth set to 0")
        return DepthValues(depth, sample.labels, DepthKind.SCALED_MBD)

    def depth_values(self, sample, kind):
        """Dispatch to mbd, mei or scaled_mbd"""
        kind = DepthKind.parse(kind)
        if kind is DepthKind.MBD:
            return self.mbd(sample)
        if kind is DepthKind.MEI:
            return self.mei(sample)
        return self.scaled_mbd(sample)
