import logging

from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from apps.experiments.management.base import EXIT_USAGE
from apps.experiments.output import load_envelope
from apps.experiments.plots import KINDS, write_plot
from apps.utils.exceptions import LZError

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Render a result envelope as an SVG figure'

    def add_arguments(self, parser):
        parser.add_argument('--input', dest='input_path', required=True, help='JSON result envelope')
        parser.add_argument('--output', dest='output_path', help='SVG path (default: next to the input)')
        parser.add_argument('--kind', choices=KINDS, required=True)

    def handle(self, *args, **options):
        source = Path(options['input_path'])
        target = Path(options['output_path'] or source.with_suffix(f".{options['kind']}.svg"))
        try:
            summary = write_plot(load_envelope(source), options['kind'], target)
        except LZError as exc:
            logger.error(f"plot failed: {exc}")
            raise CommandError(str(exc), returncode=EXIT_USAGE)
        except OSError as exc:
            raise CommandError(f"cannot write plot: {exc}", returncode=EXIT_USAGE)
        self.stdout.write(f"{summary.kind} plot with {summary.points} points written to {summary.path}")
