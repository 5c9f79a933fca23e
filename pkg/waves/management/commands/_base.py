import logging
import os

from django.core.management.base import BaseCommand, CommandError

from waves import io_persist, store
from waves.exceptions import ConfigError, WaveLabError
from waves.initial_data import build_data
from waves.models import ExperimentRun

logger = logging.getLogger(__name__)

UNDECIDED_EXIT = 2


class LabCommand(BaseCommand):
    """
    Base class for the lab commands.
    - Parses and validates the JSON configuration.
    - Opens a registry row, runs the experiment and writes report.json with the resolved config.
    - Maps WaveLabError to exit code 1 and undecided outcomes to exit code 2.
    """
    kind = None
    default_config = None  # Used when no configuration file is given

    def add_arguments(self, parser):
        parser.add_argument('config', nargs='?', default=None, help='Path to a JSON experiment configuration.')
        parser.add_argument('--output-dir', default=None, help='Directory for reports (default: a new run directory).')

    def load_config(self, path):
        """
        Returns (EvolutionConfig, data recipe, resolved configuration).
        """
        source = path if path is not None else self.default_config
        if source is None:
            raise CommandError("A configuration file is required.")
        try:
            return io_persist.parse_config(source)
        except ConfigError as exc:
            if exc.minimal_domain_end is not None:
                self.stderr.write(f"Minimal admissible domain_end: {exc.minimal_domain_end!r}")
            raise CommandError(str(exc))
        except OSError as exc:
            raise CommandError(f"Cannot read configuration: {exc}")

    def build_data(self, cfg, recipe):
        return build_data(recipe, cfg.dr, cfg.domain_end, cfg.m)

    def run_experiment(self, run, cfg, recipe, resolved):
        """
        Runs the command's experiment and returns (status, summary). Implemented by subclasses.
        """
        raise NotImplementedError

    def handle(self, *args, **options):
        self.options = options
        cfg, recipe, resolved = self.load_config(options['config'])
        run = store.start_run(self.kind, resolved, options.get('output_dir'))
        self.stdout.write(f"Run {run.id}: writing to {run.output_dir}")
        try:
            status, summary = self.run_experiment(run, cfg, recipe, resolved)
        except WaveLabError as exc:
            run.finish(ExperimentRun.FAILED, {'error': str(exc), 'error_type': type(exc).__name__})
            logger.error("Run %s failed: %s", run.id, exc)
            raise CommandError(f"{type(exc).__name__}: {exc}")

        run.finish(status, summary)
        io_persist.write_report(os.path.join(run.output_dir, 'report.json'), {'run': str(run.id), **summary}, resolved)

        if status == ExperimentRun.UNDECIDED:
            self.stdout.write(self.style.WARNING(f"Run {run.id} finished with undecided outcomes."))
            raise CommandError("Undecided outcomes present.", returncode=UNDECIDED_EXIT)
        if status in (ExperimentRun.NUMERICAL_FAILURE, ExperimentRun.FAILED):
            raise CommandError(f"Run {run.id} ended with {status}.")
        self.stdout.write(self.style.SUCCESS(f"Run {run.id} finished: {status}."))
