"""
Shared pieces of the shift_floquet management commands: the Django command base
with logging setup and the mapping from package errors to exit codes.
"""
import logging
from typing import Dict, List, Optional

from django.core.management.base import BaseCommand as DjangoBaseCommand
from django.core.management.base import CommandError

from .. import SCHEMA_VERSION, __version__, settings
from ..errors import ConfigError, ShiftFloquetError

logger = logging.getLogger(__name__)

VERBOSITY_LEVELS = {0: 'ERROR', 1: 'WARNING', 2: 'INFO', 3: 'DEBUG'}


def parse_tolerances(pairs: List[str]) -> Dict[str, float]:
    """['ode=1e-8', ...] -> {'ode': 1e-8}"""
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f'--tol expects key=value, got {pair!r}')
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f'--tol {key.strip()} needs a number, got {value!r}') from None
    return out


class BaseCommand(DjangoBaseCommand):
    """Django command without system checks; package errors become CommandError with the exit code."""
    requires_system_checks = []
    requires_migrations_checks = False
    suppressed_base_arguments = {'--settings', '--pythonpath', '--skip-checks'}

    def get_version(self):
        return f'{__version__} (report schema {SCHEMA_VERSION})'

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # argument errors raise CommandError (exit 1) instead of exiting with argparse's 2
        parser.called_from_command_line = False
        return parser

    def execute(self, *args, **options):
        settings.configure_logging(VERBOSITY_LEVELS.get(options.get('verbosity', 1), 'WARNING'))
        try:
            return super().execute(*args, **options)
        except ShiftFloquetError as e:
            logger.error(f'{type(e).__name__}: {e}')
            raise CommandError(f'✗ {type(e).__name__}: {e}', returncode=e.exit_code) from e


def add_config_arguments(parser):
    parser.add_argument('--config', required=True, help='Path to the JSON analysis config')
    parser.add_argument('--tol', action='append', default=[], metavar='KEY=VALUE',
                        help='Override one tolerance (quadrature, ode, eigen, resonance, '
                             'eps_tol, epsilon, periodicity); repeatable')


def config_overrides(options) -> Optional[Dict[str, float]]:
    return parse_tolerances(options.get('tol')) or None
