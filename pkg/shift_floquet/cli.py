"""
Command-line entry point: ``python -m shift_floquet <command> [options]``.

Exit codes: 0 success, 1 config error, 2 periodicity failure, 3 numerical failure.
"""
import sys
from typing import List, Optional

from django.conf import settings as django_settings
from django.core.management import load_command_class
from django.core.management.base import CommandError, OutputWrapper

from . import SCHEMA_VERSION, __version__

APP_NAME = 'shift_floquet'
COMMANDS = ('analyze', 'verify', 'schema')


def configure_django():
    """Minimal settings for running management commands outside a Django project."""
    if not django_settings.configured:
        django_settings.configure(USE_I18N=False, INSTALLED_APPS=[], LOGGING_CONFIG=None)


def fetch_command(name: str, stdout=None, stderr=None):
    command = load_command_class(APP_NAME, name)
    if stdout is not None:
        command.stdout = OutputWrapper(stdout)
    if stderr is not None:
        command.stderr = OutputWrapper(stderr)
    return command


def main_help_text() -> str:
    lines = [
        'Usage: python -m shift_floquet <command> [options]',
        '',
        'Available commands:',
    ]
    for name in COMMANDS:
        lines.append(f'    {name:<10} {fetch_command(name).help}')
    lines.append('')
    lines.append("Run 'python -m shift_floquet <command> --help' for command options.")
    return '\n'.join(lines)


def execute_from_command_line(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    subcommand = argv[1] if len(argv) > 1 else 'help'
    configure_django()

    if subcommand in ('help', '-h', '--help'):
        stdout.write(main_help_text() + '\n')
        return 0
    if subcommand in ('version', '--version'):
        stdout.write(f'shift-floquet {__version__} (report schema {SCHEMA_VERSION})\n')
        return 0
    if subcommand not in COMMANDS:
        stderr.write(f"Unknown command: {subcommand!r}\nType 'python -m shift_floquet help' for usage.\n")
        return 1
    argv[0] = APP_NAME
    command = fetch_command(subcommand, stdout, stderr)
    try:
        command.run_from_argv(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    except CommandError as e:
        stderr.write(f'{e}\n')
        return e.returncode
    return 0


def main():
    sys.exit(execute_from_command_line())
