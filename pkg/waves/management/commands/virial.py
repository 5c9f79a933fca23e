import os
from dataclasses import astuple

from waves import io_persist, store
from waves.diagnostics import energy, energy_bound, virial_series
from waves.exceptions import InsufficientData
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun
from waves.nonlinear_wave import evolve_nonlinear


class Command(LabCommand):
    help = "Evolve the data and write the localized virial quantity with its second-derivative surrogate."
    kind = ExperimentRun.VIRIAL

    def run_experiment(self, run, cfg, recipe, resolved):
        parameters = resolved['experiment']
        data = self.build_data(cfg, recipe)
        trajectory = evolve_nonlinear(data, cfg)
        store.record_trajectory(run, trajectory, write_snapshots=False)

        samples = virial_series(trajectory, time_offset=parameters['time_offset'])
        io_persist.write_rows(
            os.path.join(run.output_dir, 'virial.csv'),
            ['t', 'y', 'y_prime', 'y_double_prime', 'surrogate'],
            [astuple(sample) for sample in samples],
        )
        summary = {
            'event': trajectory.event.kind.value,
            'event_time': trajectory.event.time,
            'energy': energy(data, cfg.m),
            'samples': len(samples),
        }
        if not trajectory.blew_up:
            try:
                liminf, bound = energy_bound(trajectory)
                summary['energy_bound'] = {'late_minimum': liminf, 'bound': bound, 'holds': bool(liminf <= bound)}
            except InsufficientData:
                pass
        return ExperimentRun.COMPLETED, summary
