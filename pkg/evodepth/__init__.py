import os
import logging

import click
from dotenv import load_dotenv

__version__ = '1.0.0'

load_dotenv()

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level=None):
    """Configure root logging once from an explicit level or EVODEPTH_LOG_LEVEL"""
    level = (level or os.getenv('EVODEPTH_LOG_LEVEL', 'INFO')).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT, force=True)


def create_cli():
    """Build the command group and register every command"""

    @click.group(context_settings={'help_option_names': ['-h', '--help']})
    @click.version_option(__version__, prog_name='evodepth')
    @click.option('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR (env: EVODEPTH_LOG_LEVEL)')
    def cli(log_level):
        """Evolution-outlier detection for grouped smart meters using functional depths."""
        configure_logging(log_level)

    from evodepth.commands.simulate import simulate
    from evodepth.commands.detect import detect
    from evodepth.commands.benchmark import benchmark
    from evodepth.commands.smooth import smooth

    cli.add_command(simulate)
    cli.add_command(detect)
    cli.add_command(benchmark)
    cli.add_command(smooth)
    return cli


def cli_main(argv=None):
    """
    Run the command line in-process

    Args:
        argv (list, optional): Arguments without the program name, default sys.argv[1:]

    Returns:
        int: Process exit code
    """
    cli = create_cli()
    try:
        result = cli.main(args=argv, prog_name='evodepth', standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        click.echo('Aborted!', err=True)
        return 1
    return result if isinstance(result, int) else 0
