import os

from waves import io_persist, store
from waves.diagnostics import LATE_FRACTION, Classification, estimator_disagreement, resolution_report
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun
from waves.nonlinear_wave import evolve_nonlinear


class Command(LabCommand):
    help = "Evolve the data and decompose the late solution into a stationary state plus free radiation."
    kind = ExperimentRun.RESOLUTION

    def run_experiment(self, run, cfg, recipe, resolved):
        parameters = resolved['experiment']
        data = self.build_data(cfg, recipe)
        trajectory = evolve_nonlinear(data, cfg)
        store.record_trajectory(run, trajectory)
        if trajectory.blew_up:
            self.stdout.write(self.style.WARNING(
                f"Run ended with {trajectory.event.kind.value} at t={trajectory.event.time:.6g}; no resolution."
            ))
            summary = {'event': trajectory.event.kind.value, 'event_time': trajectory.event.time, 'classification': None}
            return store.EVENT_STATUS[trajectory.event.kind], summary

        report = resolution_report(trajectory, parameters['family_k_max'], t_extract=parameters['t_extract'])
        io_persist.write_rows(os.path.join(run.output_dir, 'residual_history.csv'), ['t', 'residual'],
                              report.residual_history)
        t_extract = parameters['t_extract'] if parameters['t_extract'] is not None else trajectory.times[-1]
        late = [t for t in trajectory.times if t >= LATE_FRACTION * trajectory.times[-1]]
        summary = {
            **report.as_dict(),
            'event': trajectory.event.kind.value,
            'max_energy_drift': trajectory.max_energy_drift(),
            'disagreement_history': estimator_disagreement(trajectory, late),
            't_extract': t_extract,
        }
        self.stdout.write(f"Classification: {report.classification.value} ({report.chosen_Q}, "
                          f"relative residual {report.relative_residual:.3e})")
        if report.classification == Classification.UNDECIDED:
            return ExperimentRun.UNDECIDED, summary
        return ExperimentRun.COMPLETED, summary
