import os

from django.conf import settings

from waves import io_persist
from waves.exceptions import InvalidRange
from waves.experiments import SCATTERING, dichotomy_sweep
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun


class Command(LabCommand):
    help = "Sweep the amplitude of the configured data and bracket the scattering / blow-up transition."
    kind = ExperimentRun.SWEEP

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--workers', type=int, default=None, help='Process-pool size (default: WAVE_LAB_WORKERS).')

    def run_experiment(self, run, cfg, recipe, resolved):
        parameters = resolved['experiment']
        if not parameters['lambda_grid']:
            raise InvalidRange("experiment.lambda_grid must list the amplitudes to sweep.")
        workers = self.options.get('workers') or parameters['workers'] or settings.WAVE_LAB_WORKERS
        base = self.build_data(cfg, recipe)
        result = dichotomy_sweep(base, parameters['lambda_grid'], cfg, family_k_max=parameters['family_k_max'],
                                 workers=workers)

        io_persist.write_rows(
            os.path.join(run.output_dir, 'sweep.csv'),
            ['lambda', 'outcome', 'energy', 'gradient_norm'],
            zip(result.lambda_grid, result.outcomes, result.energies, result.gradient_norms),
        )
        ground_energy = result.ground_state['energy']
        below = [
            energy for energy, outcome in zip(result.energies, result.outcomes) if outcome == SCATTERING
        ]
        summary = {
            **result.as_dict(),
            'scattering_energies_below_ground_state': all(energy < ground_energy for energy in below),
        }
        low, high = result.threshold_bracket
        self.stdout.write(f"Transition bracket: [{low:.8g}, {high:.8g}]")
        for a, b in result.monotonicity_violations:
            self.stdout.write(self.style.WARNING(f"Scattering at {a:.8g} above blow-up at {b:.8g}."))
        if result.intermediate:
            self.stdout.write(self.style.WARNING(
                f"Intermediate outcomes inside the bracket: {len(result.intermediate)} amplitude(s)."))
        if result.undecided:
            return ExperimentRun.UNDECIDED, summary
        return ExperimentRun.COMPLETED, summary
