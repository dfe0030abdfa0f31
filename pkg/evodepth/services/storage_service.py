import os
import re
import glob
import json
import logging

import numpy as np
import pandas as pd

from evodepth.errors import IngestionError
from evodepth.models.panel import Grid, MeterPanel, LongRecord
from evodepth.models.report import DetectionReport

logger = logging.getLogger(__name__)

LONG_COLUMNS = ['meter_id', 'timestamp', 'value']
_INTEGER = re.compile(r'^[+-]?\d+$')
_SAFE_ID = re.compile(r'^[A-Za-z0-9_.-]+$')


class StorageService:
    """Reading and writing long CSVs, panel archives, labels, reports and plot data"""

    def read_long_csv(self, path):
        """
        Read a long-format CSV with header meter_id,timestamp,value

        Args:
            path (str): CSV file path (UTF-8)

        Returns:
            list: LongRecord per meter, in order of first appearance
        """
        if not os.path.isfile(path):
            raise IngestionError("file not found", path=path)
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False, encoding='utf-8')
        except (pd.errors.ParserError, UnicodeDecodeError) as e:
            raise IngestionError(f"could not parse CSV: {e}", path=path)
        frame = frame.fillna('')
        if list(frame.columns) != LONG_COLUMNS:
            raise IngestionError(f"header must be {','.join(LONG_COLUMNS)}, got {','.join(frame.columns)}",
                                 line=1, path=path)
        if frame.empty:
            raise IngestionError("no readings", path=path)

        # header is line 1, first data row is line 2
        lines = frame.index.to_numpy() + 2
        empty = (frame.apply(lambda column: column.str.strip()) == '').all(axis=1)
        if empty.any():
            raise IngestionError("blank row", line=int(lines[empty.to_numpy()][0]), path=path)
        for column in LONG_COLUMNS:
            blank = frame[column].str.strip() == ''
            if blank.any():
                raise IngestionError(f"empty {column}", line=int(lines[blank.to_numpy()][0]), path=path)

        text = frame['value'].str.strip()
        try:
            values = text.astype(float)
        except ValueError:
            # only used to locate the offending row
            values = pd.to_numeric(text, errors='coerce')
        bad = pd.Series(~np.isfinite(values.to_numpy(dtype=float)), index=frame.index)
        if bad.any():
            line = int(lines[bad.to_numpy()][0])
            raise IngestionError(f"non-numeric reading {frame['value'][bad].iloc[0]!r}", line=line, path=path)

        timestamps = self._parse_timestamps(frame['timestamp'].str.strip(), lines, path)

        records = []
        meter_ids = frame['meter_id'].str.strip()
        for meter_id in pd.unique(meter_ids):
            mask = (meter_ids == meter_id).to_numpy()
            records.append(LongRecord(meter_id, timestamps[mask], values.to_numpy()[mask]))
        logger.info(f"Read {len(records)} meters ({len(frame)} readings) from {path}")
        return records

    def _parse_timestamps(self, column, lines, path):
        """Integer sample indices or ISO-8601 instants, never a mix"""
        is_integer = column.str.match(_INTEGER)
        if is_integer.all():
            return column.astype(np.int64).to_numpy()
        if is_integer.any():
            line = int(lines[is_integer.to_numpy()][0])
            raise IngestionError("integer sample index mixed with ISO-8601 timestamps", line=line, path=path)
        parsed = pd.to_datetime(column, format='ISO8601', utc=True, errors='coerce')
        if parsed.isna().any():
            line = int(lines[parsed.isna().to_numpy()][0])
            raise IngestionError(f"unparseable timestamp {column[parsed.isna()].iloc[0]!r}", line=line, path=path)
        return parsed.dt.tz_localize(None).to_numpy(dtype='datetime64[ns]')

    def write_long_csv(self, records, path):
        """Write LongRecords as meter_id,timestamp,value rows"""
        frames = []
        for record in records:
            stamps = record.timestamps
            if np.issubdtype(stamps.dtype, np.datetime64):
                whole_seconds = np.all(stamps == stamps.astype('datetime64[s]'))
                stamps = np.datetime_as_string(stamps, unit='s' if whole_seconds else 'auto')
            frames.append(pd.DataFrame({
                'meter_id': record.meter_id,
                'timestamp': stamps,
                'value': record.readings,
            }))
        self._ensure_parent(path)
        pd.concat(frames, ignore_index=True).to_csv(path, index=False, encoding='utf-8')

    def write_panel_archive(self, panel, directory):
        """
        Write a panel as grid.csv, days.csv, meters.csv and one meter_<id>.csv (T rows x p columns)

        Args:
            panel (MeterPanel): Panel to write
            directory (str): Target directory, created if missing
        """
        os.makedirs(directory, exist_ok=True)
        for meter_id in panel.meter_ids:
            if not _SAFE_ID.match(meter_id):
                raise IngestionError(f"meter id {meter_id!r} cannot be used as a file name")
        pd.DataFrame({'x': panel.grid.points}).to_csv(os.path.join(directory, 'grid.csv'), index=False)
        pd.DataFrame({'day': panel.day_index}).to_csv(os.path.join(directory, 'days.csv'), index=False)
        pd.DataFrame({'meter_id': panel.meter_ids}).to_csv(os.path.join(directory, 'meters.csv'), index=False)
        for meter_id, curves in zip(panel.meter_ids, panel.values):
            pd.DataFrame(curves).to_csv(os.path.join(directory, f"meter_{meter_id}.csv"),
                                        index=False, header=False)
        logger.info(f"Wrote panel archive with {panel.n_meters} meters to {directory}")

    def read_panel_archive(self, directory):
        """Read a panel archive written by write_panel_archive"""
        if not os.path.isdir(directory):
            raise IngestionError("panel archive directory not found", path=directory)
        grid_path = os.path.join(directory, 'grid.csv')
        days_path = os.path.join(directory, 'days.csv')
        for required in (grid_path, days_path):
            if not os.path.isfile(required):
                raise IngestionError("missing archive file", path=required)

        grid = Grid(self._read_column(grid_path, 'x', numeric=True))
        days = [self._day_label(v) for v in self._read_column(days_path, 'day', numeric=False)]

        meters_path = os.path.join(directory, 'meters.csv')
        if os.path.isfile(meters_path):
            meter_ids = [str(m) for m in self._read_column(meters_path, 'meter_id', numeric=False)]
        else:
            files = sorted(glob.glob(os.path.join(directory, 'meter_*.csv')))
            meter_ids = [os.path.basename(f)[len('meter_'):-len('.csv')] for f in files]

        values = []
        for meter_id in meter_ids:
            path = os.path.join(directory, f"meter_{meter_id}.csv")
            if not os.path.isfile(path):
                raise IngestionError("missing meter file", path=path)
            frame = pd.read_csv(path, header=None, float_precision='round_trip')
            curves = frame.apply(pd.to_numeric, errors='coerce').to_numpy(dtype=float)
            if np.isnan(curves).any():
                row = int(np.argwhere(np.isnan(curves))[0][0]) + 1
                raise IngestionError("non-numeric or missing value", line=row, path=path)
            if curves.shape != (len(days), grid.size):
                raise IngestionError(
                    f"meter {meter_id} has shape {curves.shape}, expected ({len(days)}, {grid.size})",
                    path=path,
                )
            values.append(curves)
        if len(values) < 2:
            raise IngestionError(f"N >= 2 required, got N = {len(values)}", path=directory)
        return MeterPanel(meter_ids, days, grid, np.stack(values))

    def _read_column(self, path, column, numeric):
        frame = pd.read_csv(path, float_precision='round_trip', dtype=None if numeric else str)
        if column not in frame.columns:
            raise IngestionError(f"missing column {column!r}", line=1, path=path)
        series = frame[column]
        if numeric:
            parsed = pd.to_numeric(series, errors='coerce')
            if parsed.isna().any():
                raise IngestionError("non-numeric value", line=int(np.argmax(parsed.isna().to_numpy())) + 2,
                                     path=path)
            return parsed.to_numpy(dtype=float)
        return [str(v) for v in series]

    @staticmethod
    def _day_label(value):
        return int(value) if _INTEGER.match(str(value)) else str(value)

    def write_labels(self, meter_ids, flags, path):
        """labels.csv with columns meter_id,is_outlier (0/1)"""
        self._ensure_parent(path)
        pd.DataFrame({'meter_id': list(meter_ids), 'is_outlier': np.asarray(flags, dtype=int)}).to_csv(
            path, index=False)

    def read_labels(self, path):
        """Map meter_id -> bool from a labels.csv"""
        if not os.path.isfile(path):
            raise IngestionError("labels file not found", path=path)
        frame = pd.read_csv(path, dtype={'meter_id': str})
        return {str(m): bool(int(v)) for m, v in zip(frame['meter_id'], frame['is_outlier'])}

    def write_json(self, data, path):
        self._ensure_parent(path)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write('\n')

    def read_json(self, path):
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)

    def write_report(self, report, path):
        """Write a DetectionReport as JSON"""
        report.save(path)
        logger.info(f"Wrote report to {path}")

    def read_report(self, path):
        if not os.path.isfile(path):
            raise IngestionError("report not found", path=path)
        try:
            return DetectionReport.load(path)
        except (KeyError, json.JSONDecodeError) as e:
            raise IngestionError(f"malformed report: {e}", path=path)

    def write_depth_csv(self, depth_panel, prototype, path):
        """
        Plot-ready depth series: one row per day, one column per meter plus the prototype

        Args:
            depth_panel (DepthPanel): Per-meter depth series
            prototype (Prototype): Trimmed-mean prototype
            path (str): Output CSV path
        """
        frame = pd.DataFrame(depth_panel.matrix.T, columns=depth_panel.meter_ids)
        frame.insert(0, 'day', depth_panel.day_index)
        frame['prototype'] = prototype.series
        self._ensure_parent(path)
        frame.to_csv(path, index=False)

    def read_depth_csv(self, path):
        return pd.read_csv(path, float_precision='round_trip')

    @staticmethod
    def _ensure_parent(path):
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
