import logging

from django.core.management.base import BaseCommand, CommandError

from apps.experiments.config import FIELD_NAMES, resolve_config
from apps.experiments.output import build_envelope, record_run, write_result
from apps.utils.exceptions import DataError, DomainError, LZError, UnknownFamilyError, UnsupportedFamilyError

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (DomainError, UnknownFamilyError, UnsupportedFamilyError, DataError)


def exit_code_for(exc):
    """Usage and domain problems exit 2; numerical failures count as a missed tolerance."""
    return EXIT_USAGE if isinstance(exc, USAGE_ERRORS) else EXIT_TOLERANCE


class ExperimentCommand(BaseCommand):
    """
    Shared plumbing of the experiment commands: resolve and validate the
    run configuration, run, write the result envelope, record the run and
    exit 0 (pass), 1 (tolerance failure) or 2 (usage or domain error).

    Subclasses add their flags in add_experiment_arguments and implement
    run(config) -> (records, passed, summary).
    """
    command_name = None

    def add_arguments(self, parser):
        parser.add_argument('--config', dest='config_file', help='key=value file or JSON result envelope')
        parser.add_argument('-o', '--output', dest='output_path', help='result file path')
        parser.add_argument('--format', dest='output_format', choices=['json', 'csv'])
        parser.add_argument('--tolerance', type=float, help='asserted tolerance')
        parser.add_argument('--probability-tolerance', dest='probability_tolerance', type=float,
                            help='convergence tolerance of the infinite-time limit')
        parser.add_argument('--no-timestamp', action='store_true', help='omit created_at from the envelope')
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def run(self, config):
        raise NotImplementedError

    def handle(self, *args, **options):
        flags = {name: options.get(name) for name in FIELD_NAMES.values() if name != 'command'}
        try:
            config = resolve_config(self.command_name, flags, options.get('config_file'))
            records, passed, summary = self.run(config)
        except LZError as exc:
            logger.error(f"{self.command_name} failed: {exc}")
            raise CommandError(str(exc), returncode=exit_code_for(exc))

        exit_code = EXIT_PASS if passed else EXIT_TOLERANCE
        envelope = build_envelope(config, records, timestamp=not options['no_timestamp'])
        try:
            path = write_result(config, envelope)
        except OSError as exc:
            raise CommandError(f"cannot write {self.command_name} result: {exc}", returncode=EXIT_USAGE)
        record_run(config, envelope, exit_code, path)

        self.stdout.write(summary)
        self.stdout.write(f"Result written to {path}")
        if not passed:
            raise CommandError(f"{self.command_name}: tolerance check failed", returncode=EXIT_TOLERANCE)
        self.stdout.write(self.style.SUCCESS(f"{self.command_name}: passed"))
