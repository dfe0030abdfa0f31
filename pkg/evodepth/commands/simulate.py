import os

import click

from evodepth.commands import handle_errors, run_metadata
from evodepth.models.scenario import SimScenario
from evodepth.services.simulation_service import SimulationService


@click.command()
@click.option('--model', type=click.Choice(['1', '2']), default='1', show_default=True, help='Simulation model')
@click.option('--n', 'n_meters', type=int, default=100, show_default=True, help='Typical meters N')
@click.option('--t', 'n_days', type=int, default=50, show_default=True, help='Days T')
@click.option('--p', 'p', type=int, default=lambda: int(os.environ.get('EVODEPTH_GRID_SIZE', 50)),
              show_default='50', help='Grid points per day')
@click.option('--frac', 'fraction', type=float, default=0.05, show_default=True,
              help='Outliers added, as a fraction of N')
@click.option('--rho', type=int, default=5, show_default=True, help='Model 1 trend length')
@click.option('--eta-eps', type=float, default=0.8, show_default=True, help='Group effect variance scale')
@click.option('--eta-ups', type=float, default=1.5, show_default=True, help='Meter effect variance scale')
@click.option('--eta-ups-outlier', type=float, default=0.5, show_default=True,
              help='Model 1 outlier meter effect variance scale')
@click.option('--lambda', 'lam', type=float, default=0.1, show_default=True, help='Covariance decay')
@click.option('--seed', type=int, default=lambda: int(os.environ.get('EVODEPTH_SEED', 0)), show_default='0')
@click.option('--out', 'out', type=click.Path(file_okay=False), required=True, help='Output archive directory')
@handle_errors
def simulate(model, n_meters, n_days, p, fraction, rho, eta_eps, eta_ups, eta_ups_outlier, lam, seed, out):
    """Generate a Model 1 or Model 2 panel with planted evolution outliers."""
    scenario = SimScenario(model=model, n_meters=n_meters, n_days=n_days, p=p, outlier_fraction=fraction,
                           rho=rho, eta_eps=eta_eps, lam=lam, eta_ups=eta_ups,
                           eta_ups_outlier=eta_ups_outlier, seed=seed)
    simulation_service = SimulationService()
    labeled = simulation_service.generate(scenario)
    parameters = scenario.to_dict()
    parameters.pop('seed')
    metadata = run_metadata('simulate', seed=seed, **parameters)
    simulation_service.write_simulation(labeled, out, metadata)
    click.echo(f"Wrote {labeled.panel.n_meters} meters ({len(labeled.outlier_ids)} outliers) to {out}")
