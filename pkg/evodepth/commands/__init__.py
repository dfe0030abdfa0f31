import logging
import platform
import functools
from datetime import datetime, timezone

import click
import numpy as np

from evodepth.errors import EvodepthError

logger = logging.getLogger(__name__)


def handle_errors(f):
    """Decorator turning service errors into a diagnostic and exit status 1"""
    @functools.wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except EvodepthError as e:
            logger.error(f"{f.__name__} failed: {e}")
            raise click.ClickException(str(e))
        except OSError as e:
            logger.error(f"{f.__name__} failed: {e}")
            raise click.ClickException(str(e))
    return decorated_function


def run_metadata(command, seed=None, **parameters):
    """Metadata block written next to every output; created_at is the only non-reproducible field"""
    from evodepth import __version__
    return {
        'command': command,
        'version': __version__,
        'seed': seed,
        'parameters': dict(parameters),
        'python': platform.python_version(),
        'numpy': np.__version__,
        'created_at': datetime.now(timezone.utc).isoformat(),
    }


class BasisType(click.ParamType):
    """B-spline basis size: an integer K >= 4 or 'auto'"""
    name = 'K|auto'

    def convert(self, value, param, ctx):
        if value is None or isinstance(value, int):
            return value
        if str(value).lower() == 'auto':
            return 'auto'
        try:
            k = int(value)
        except ValueError:
            self.fail(f"{value!r} is neither an integer nor 'auto'", param, ctx)
        if k < 4:
            self.fail(f"K must be >= 4, got {k}", param, ctx)
        return k


BASIS = BasisType()
