"""
Print the JSON schema of the analysis report (or of the config).
"""
import json

from ... import SCHEMA_VERSION
from ...schemas import AnalysisConfig, AnalysisReport
from ..base import BaseCommand


class Command(BaseCommand):
    help = 'Print the JSON schema for reports or configs'

    def add_arguments(self, parser):
        parser.add_argument(
            '--config-schema',
            action='store_true',
            help='Print the config schema instead of the report schema'
        )

    def handle(self, *args, **options):
        model = AnalysisConfig if options['config_schema'] else AnalysisReport
        schema = model.model_json_schema()
        schema['$comment'] = f'schema version {SCHEMA_VERSION}'
        self.stdout.write(json.dumps(schema, indent=2, sort_keys=True))
