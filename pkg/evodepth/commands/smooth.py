import os

import click

from evodepth.commands import handle_errors, run_metadata, BASIS
from evodepth.commands.detect import load_panel
from evodepth.services.smoothing_service import SmoothingService
from evodepth.services.storage_service import StorageService


@click.command()
@click.argument('path', type=click.Path(exists=True))
@click.option('--basis', type=BASIS, default='auto', show_default=True, help='B-spline basis size K or auto')
@click.option('--deriv', type=click.Choice(['0', '1']), default='0', show_default=True,
              help='Write fitted curves (0) or first derivatives (1)')
@click.option('--samples-per-day', type=int, default=None, help='Readings per day for long CSV input')
@click.option('--out', 'out', type=click.Path(file_okay=False), required=True, help='Output archive directory')
@handle_errors
def smooth(path, basis, deriv, samples_per_day, out):
    """Smooth every daily curve with cubic B-splines and write the result as an archive."""
    panel = load_panel(path, samples_per_day)
    smoothed, info = SmoothingService().smooth_panel(panel, n_basis=basis, derivative_order=int(deriv))
    storage_service = StorageService()
    storage_service.write_panel_archive(smoothed, out)
    info['metadata'] = run_metadata('smooth', basis=basis, derivative_order=int(deriv),
                                    samples_per_day=samples_per_day)
    storage_service.write_json(info, os.path.join(out, 'smoothing.json'))
    click.echo(f"Smoothed {smoothed.n_meters} meters x {smoothed.n_days} days with K={info['n_basis']} "
               f"(derivative order {deriv}) to {out}")
