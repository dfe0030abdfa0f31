import os

import click

from evodepth.commands import handle_errors, run_metadata
from evodepth.models.scenario import OUTLIER_FRACTIONS
from evodepth.services.benchmark_service import BenchmarkService
from evodepth.services.storage_service import StorageService

FULL_REPLICATES = 100


def _float_list(ctx, param, value):
    if value is None:
        return list(OUTLIER_FRACTIONS)
    try:
        fractions = [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated fractions, got {value!r}")
    if not fractions or any(not 0 < f < 1 for f in fractions):
        raise click.BadParameter(f"fractions must lie in (0, 1), got {value!r}")
    return fractions


@click.command()
@click.option('--model', type=click.Choice(['1', '2']), required=True, help='Simulation model')
@click.option('--replicates', type=int, default=None, help='Replicates R (env: EVODEPTH_REPLICATES, default 20)')
@click.option('--full', is_flag=True, default=False, help=f'Use R = {FULL_REPLICATES}')
@click.option('--fractions', default=None, callback=_float_list, help='Comma-separated outlier fractions')
@click.option('--methods', default='tdepth,stdepth', show_default=True, help='Comma-separated methods')
@click.option('--seed', type=int, default=lambda: int(os.environ.get('EVODEPTH_SEED', 0)), show_default='0',
              help='Replicate r uses seed + r')
@click.option('--n', 'n_meters', type=int, default=100, show_default=True)
@click.option('--t', 'n_days', type=int, default=50, show_default=True)
@click.option('--p', 'p', type=int, default=lambda: int(os.environ.get('EVODEPTH_GRID_SIZE', 50)), show_default='50')
@click.option('--rho', type=int, default=5, show_default=True)
@click.option('--gamma', type=float, default=None, help='Whisker factor (env: EVODEPTH_GAMMA, default 0.72)')
@click.option('--out', 'out', type=click.Path(file_okay=False), default=None,
              help='Directory for benchmark.csv, benchmark.txt and benchmark.json')
@handle_errors
def benchmark(model, replicates, full, fractions, methods, seed, n_meters, n_days, p, rho, gamma, out):
    """Replicate the simulation study and print mean TPR / TNR per method and fraction."""
    benchmark_service = BenchmarkService()
    if full:
        replicates = FULL_REPLICATES
    methods = [m.strip() for m in methods.split(',') if m.strip()]
    if not methods:
        raise click.BadParameter("at least one method required", param_hint="--methods")
    results = benchmark_service.run_benchmark(
        model, fractions=fractions, methods=methods, replicates=replicates, base_seed=seed,
        n_meters=n_meters, n_days=n_days, p=p, rho=rho, gamma=gamma,
    )
    table = benchmark_service.format_table(results)
    click.echo(table)

    if out:
        os.makedirs(out, exist_ok=True)
        benchmark_service.write_csv(results, os.path.join(out, 'benchmark.csv'))
        with open(os.path.join(out, 'benchmark.txt'), 'w', encoding='utf-8') as f:
            f.write(table + '\n')
        metadata = run_metadata('benchmark', seed=seed, model=int(model), replicates=results[0].replicates,
                                fractions=fractions, methods=methods, n_meters=n_meters, n_days=n_days,
                                p=p, rho=rho, gamma=gamma if gamma is not None else
                                benchmark_service.detection_service.gamma)
        StorageService().write_json(
            {'metadata': metadata, 'results': [r.to_dict() for r in results]},
            os.path.join(out, 'benchmark.json'),
        )
