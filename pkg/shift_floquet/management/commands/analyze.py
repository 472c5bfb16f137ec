"""
Run the full Floquet analysis for a config.
Usage: python -m shift_floquet analyze --config configs/example1_qz.json
"""
from ...analysis import FloquetAnalyzer, load_config
from ...errors import PeriodicityViolation
from ...reports import emit_samples, write_report
from ..base import BaseCommand, add_config_arguments, config_overrides


class Command(BaseCommand):
    help = 'Verify periodicity, decompose the monodromy and classify stability'

    def add_arguments(self, parser):
        add_config_arguments(parser)
        parser.add_argument(
            '--report',
            type=str,
            help='Write the JSON report here (default: outputs.report_path, else stdout)'
        )
        parser.add_argument(
            '--samples',
            type=str,
            help='Write the CSV sample tracks here (default: outputs.samples_path)'
        )

    def handle(self, *args, **options):
        cfg = load_config(options['config'], config_overrides(options))
        analyzer = FloquetAnalyzer(cfg)
        try:
            result = analyzer.run()
        except PeriodicityViolation as e:
            for violation in e.violations[:20]:
                self.stderr.write(f"   {violation['check']} at t={violation['t']!r}: {violation['detail']}")
            if len(e.violations) > 20:
                self.stderr.write(f'   ... {len(e.violations) - 20} more')
            raise

        report = result.report
        report_path = options['report'] or cfg.outputs.report_path
        samples_path = options['samples'] or cfg.outputs.samples_path
        if report_path:
            write_report(report, report_path)
        else:
            self.stdout.write(report.model_dump_json(indent=2))
        if samples_path:
            emit_samples(result, samples_path, cfg.analysis.samples)

        summary = self.stderr if not report_path else self.stdout
        multipliers = ', '.join(f'{m.real:.6g}{m.imag:+.6g}j' for m in report.floquet.multipliers)
        summary.write(self.style.SUCCESS(f'✓ Multipliers: {multipliers}'))
        summary.write(f'   Periodic solution: {"yes" if report.floquet.periodic_solution.exists else "no"}')
        summary.write(f'   Verdict (eigenvalue paths): {report.stability.verdict_theorem}')
        summary.write(f'   Verdict (multiplier moduli): {report.stability.verdict_corollary}')
        for note in report.notes + report.stability.notes[1:]:
            summary.write(self.style.WARNING(f'   ⚠ {note}'))
        if report_path:
            summary.write(f'   Report: {report_path}')
        if samples_path:
            summary.write(f'   Samples: {samples_path}')
