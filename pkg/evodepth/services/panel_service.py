import logging

import numpy as np

from evodepth.errors import PanelError
from evodepth.models.panel import Grid, CurveSample, MeterPanel

logger = logging.getLogger(__name__)


class PanelService:
    """Slicing long meter records into daily curves and assembling grouped panels"""

    def fold_to_daily(self, record, p):
        """
        Slice a long record into consecutive daily curves of p readings each

        Args:
            record (LongRecord): Readings of one meter in time order
            p (int): Number of readings per day

        Returns:
            CurveSample: T = len(record) / p curves labelled 1..T on a uniform unit grid
        """
        p = int(p)
        if p < 2:
            raise PanelError(f"Meter {record.meter_id}: p >= 2 readings per day required, got {p}")
        length = len(record)
        remainder = length % p
        if length == 0 or remainder:
            raise PanelError(
                f"Meter {record.meter_id}: {length} readings is not a multiple of p = {p} "
                f"(remainder {remainder})"
            )
        self._check_timestamps(record, p)
        n_days = length // p
        values = record.readings.reshape(n_days, p)
        return CurveSample(Grid.uniform(p), values, list(range(1, n_days + 1)))

    def _check_timestamps(self, record, p):
        """Timestamps must increase strictly and be uniformly spaced within each day"""
        timestamps = record.timestamps
        if timestamps.size < 2:
            return
        steps = np.diff(timestamps)
        is_time = np.issubdtype(timestamps.dtype, np.datetime64)
        zero = np.timedelta64(0, 'ns') if is_time else 0
        if np.any(steps <= zero):
            first = int(np.argmax(steps <= zero)) + 1
            raise PanelError(
                f"Meter {record.meter_id}: timestamps must be strictly increasing (position {first + 1})"
            )
        days = timestamps.reshape(-1, p)
        for day, stamps in enumerate(days, start=1):
            spacing = np.diff(stamps)
            if spacing.size == 0:
                continue
            uniform = np.all(spacing == spacing[0]) if is_time else np.allclose(spacing, spacing[0])
            if not uniform:
                raise PanelError(f"Meter {record.meter_id}: readings of day {day} are not uniformly spaced")
            if is_time:
                self._check_calendar_day(record.meter_id, day, stamps, spacing[0])

    def _check_calendar_day(self, meter_id, day, stamps, step):
        """The p readings of a day cover exactly one calendar date, first slot to last"""
        dates = stamps.astype('datetime64[D]')
        midnight = dates[0].astype(stamps.dtype)
        next_midnight = (dates[0] + np.timedelta64(1, 'D')).astype(stamps.dtype)
        if np.any(dates != dates[0]) or stamps[0] - midnight >= step or stamps[-1] + step < next_midnight:
            raise PanelError(
                f"Meter {meter_id}: partial day {day} ({stamps[0]} .. {stamps[-1]}); "
                f"each day must hold the p readings of one calendar date"
            )

    def assemble_panel(self, samples):
        """
        Stack per-meter curve samples into a rectangular panel

        Args:
            samples (list): (meter_id, CurveSample) pairs in the desired meter order

        Returns:
            MeterPanel: N x T x p panel, meter and day order preserved
        """
        samples = list(samples)
        if len(samples) < 2:
            raise PanelError(f"N >= 2 required, got N = {len(samples)}")
        first_id, first = samples[0]
        for meter_id, sample in samples[1:]:
            if sample.grid.size != first.grid.size or sample.grid != first.grid:
                raise PanelError(
                    f"Meter {meter_id}: grid of {sample.grid.size} points does not match "
                    f"meter {first_id} ({first.grid.size} points)"
                )
            if sample.n != first.n:
                raise PanelError(
                    f"Meter {meter_id}: {sample.n} days, expected {first.n} like meter {first_id}"
                )
        values = np.stack([sample.values for _, sample in samples])
        panel = MeterPanel([m for m, _ in samples], first.labels, first.grid, values)
        logger.info(f"Assembled panel with N={panel.n_meters}, T={panel.n_days}, p={panel.grid.size}")
        return panel

    def panel_from_long_records(self, records, p):
        """Fold every record into days and assemble the panel, in record order"""
        return self.assemble_panel([(r.meter_id, self.fold_to_daily(r, p)) for r in records])

    def nonzero_window(self, panel, threshold=0.0):
        """
        Locate the largest contiguous grid window whose pooled median |value| exceeds threshold

        Returns:
            tuple: (start, stop) grid indices, inclusive
        """
        if threshold < 0:
            raise PanelError(f"Trim threshold must be >= 0, got {threshold}")
        pooled = np.median(np.abs(panel.values), axis=(0, 1))
        passing = pooled > threshold
        if not passing.any():
            raise PanelError(f"No grid point has a pooled median |value| above {threshold}")
        best_start, best_length = 0, 0
        start = None
        for k, ok in enumerate(np.append(passing, False)):
            if ok and start is None:
                start = k
            elif not ok and start is not None:
                if k - start > best_length:
                    best_start, best_length = start, k - start
                start = None
        return best_start, best_start + best_length - 1

    def trim_nonzero_window(self, panel, threshold=0.0):
        """
        Restrict a panel to its largest non-zero window, e.g. daylight hours of solar generation

        Args:
            panel (MeterPanel): Panel to trim
            threshold (float): Pooled medians must be strictly above this value

        Returns:
            MeterPanel: Panel on the trimmed grid
        """
        start, stop = self.nonzero_window(panel, threshold)
        if start == 0 and stop == panel.grid.size - 1:
            return panel
        if stop == start:
            raise PanelError(f"Non-zero window holds a single grid point (index {start}); p >= 2 required")
        logger.info(f"Trimmed grid to indices {start}..{stop} of {panel.grid.size}")
        return panel.with_values(panel.values[:, :, start:stop + 1], grid=panel.grid.subset(start, stop))
