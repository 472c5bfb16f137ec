"""
Periodicity-in-shifts checks only.
Usage: python -m shift_floquet verify --config configs/example1_qz.json
"""
from ...analysis import FloquetAnalyzer, load_config
from ...errors import PeriodicityViolation
from ..base import BaseCommand, add_config_arguments, config_overrides


class Command(BaseCommand):
    help = 'Check that the time scale, the shift axioms, A and F are periodic in shifts'

    def add_arguments(self, parser):
        add_config_arguments(parser)

    def handle(self, *args, **options):
        cfg = load_config(options['config'], config_overrides(options))
        outcome = FloquetAnalyzer(cfg).verify()

        for report in outcome.reports:
            label = f'{report.mode:<15} {report.checked:>5} checks'
            if report.passed:
                self.stdout.write(self.style.SUCCESS(f'✓ {label}'))
            else:
                self.stdout.write(self.style.ERROR(f'✗ {label}, {len(report.violations)} violation(s)'))
                for v in report.violations[:10]:
                    self.stdout.write(f'   {v.check} at t={v.t!r}: {v.detail}')

        if outcome.F is not None and not outcome.F.passed:
            self.stdout.write(self.style.WARNING('⚠ F is not delta-periodic; analyze will only note it'))
        if not outcome.hard_passed:
            raise PeriodicityViolation(
                'periodicity verification failed',
                violations=[v.as_dict() for v in outcome.violations(hard_only=True)],
                module='verify',
            )
        self.stdout.write(self.style.SUCCESS(f'\n✅ Periodic in shifts ({outcome.checked} checks)'))
