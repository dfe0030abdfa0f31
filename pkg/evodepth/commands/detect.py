import os
import logging

import click

from evodepth.commands import handle_errors, run_metadata, BASIS
from evodepth.errors import IngestionError
from evodepth.services.benchmark_service import tpr_tnr
from evodepth.services.detection_service import DetectionService
from evodepth.services.panel_service import PanelService
from evodepth.services.storage_service import StorageService

logger = logging.getLogger(__name__)


def load_panel(path, samples_per_day):
    """Panel from an archive directory or a long CSV (which needs samples per day)"""
    storage_service = StorageService()
    if os.path.isdir(path):
        return storage_service.read_panel_archive(path)
    if samples_per_day is None:
        raise IngestionError("--samples-per-day is required for long CSV input", path=path)
    records = storage_service.read_long_csv(path)
    return PanelService().panel_from_long_records(records, samples_per_day)


@click.command()
@click.argument('path', type=click.Path(exists=True))
@click.option('--method', type=click.Choice(['tdepth', 'stdepth'], case_sensitive=False), default='stdepth',
              show_default=True, help='Depth series (tdepth) or scaled depth series (stdepth)')
@click.option('--deriv', type=click.Choice(['0', '1']), default='0', show_default=True,
              help='Analyse level curves (0) or first derivatives (1)')
@click.option('--basis', type=BASIS, default=None,
              help='B-spline basis size K or auto; first derivatives default to auto')
@click.option('--gamma', type=float, default=None, help='Whisker factor (env: EVODEPTH_GAMMA, default 0.72)')
@click.option('--samples-per-day', type=int, default=None, help='Readings per day for long CSV input')
@click.option('--trim/--no-trim', default=False, show_default=True,
              help='Keep only the largest window with non-zero pooled median (e.g. daylight)')
@click.option('--trim-threshold', type=float, default=0.0, show_default=True)
@click.option('--leave-one-out', is_flag=True, default=False,
              help='Compare each meter with the prototype of the other meters')
@click.option('--seed', type=int, default=None, help='Recorded in the metadata only; detection is deterministic')
@click.option('--out', 'out', type=click.Path(dir_okay=False), default=None,
              help='Report JSON path (default: report.json next to the input)')
@click.option('--depth-csv', type=click.Path(dir_okay=False), default=None,
              help='Plot-ready depth series CSV (default: <report>_depths.csv)')
@handle_errors
def detect(path, method, deriv, basis, gamma, samples_per_day, trim, trim_threshold, leave_one_out,
           seed, out, depth_csv):
    """Flag meters whose depth evolution is far from the group prototype."""
    derivative_order = int(deriv)
    panel = load_panel(path, samples_per_day)
    if trim:
        panel = PanelService().trim_nonzero_window(panel, trim_threshold)

    detection_service = DetectionService()
    gamma = detection_service.gamma if gamma is None else gamma
    base = path if os.path.isdir(path) else os.path.dirname(os.path.abspath(path))
    out = out or os.path.join(base, 'report.json')
    depth_csv = depth_csv or os.path.splitext(out)[0] + '_depths.csv'

    metadata = run_metadata('detect', seed=seed, method=method.upper(), derivative_order=derivative_order,
                            basis=basis, gamma=gamma, trim=trim, trim_threshold=trim_threshold,
                            leave_one_out=leave_one_out, samples_per_day=samples_per_day)
    scenario_path = os.path.join(base, 'scenario.json')
    storage_service = StorageService()
    if os.path.isdir(path) and os.path.isfile(scenario_path):
        scenario = storage_service.read_json(scenario_path)
        scenario.pop('metadata', None)
        metadata['scenario'] = scenario
    if trim:
        metadata['trimmed_grid'] = [panel.grid.points[0], panel.grid.points[-1], panel.grid.size]

    report, depth_panel, prototype = detection_service.analyse(
        panel, method=method, derivative_order=derivative_order, gamma=gamma, basis=basis,
        leave_one_out=leave_one_out, metadata=metadata,
    )
    storage_service.write_report(report, out)
    storage_service.write_depth_csv(depth_panel, prototype, depth_csv)

    click.echo(f"{report.method.value} derivative {derivative_order}: threshold {report.threshold:.6g}, "
               f"flagged {len(report.flagged_ids)} of {len(report.meter_ids)}")
    for meter_id in report.flagged_ids:
        click.echo(meter_id)

    labels_path = os.path.join(base, 'labels.csv')
    if os.path.isdir(path) and os.path.isfile(labels_path):
        labels = storage_service.read_labels(labels_path)
        truth = [labels.get(m, False) for m in report.meter_ids]
        if any(truth) and not all(truth):
            tpr, tnr = tpr_tnr(report.flags, truth)
            click.echo(f"TPR {tpr:.3f} TNR {tnr:.3f} against {labels_path}")
