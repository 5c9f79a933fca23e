from waves import store
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun
from waves.nonlinear_wave import EventKind, evolve_nonlinear


class Command(LabCommand):
    help = "Evolve the configured data with the nonlinear solver; writes snapshot CSVs and the energy log."
    kind = ExperimentRun.EVOLVE

    def run_experiment(self, run, cfg, recipe, resolved):
        data = self.build_data(cfg, recipe)
        trajectory = evolve_nonlinear(data, cfg)
        store.record_trajectory(run, trajectory)

        drift = trajectory.max_energy_drift()
        if trajectory.event.kind == EventKind.BLOW_UP:
            self.stdout.write(self.style.WARNING(f"Blow-up detected at t={trajectory.event.time:.6g}."))
        elif drift > cfg.energy_tolerance:
            self.stdout.write(self.style.WARNING(f"Energy drift {drift:.3e} above tolerance {cfg.energy_tolerance:.1e}."))
        summary = {
            'event': trajectory.event.kind.value,
            'event_time': trajectory.event.time,
            'max_energy_drift': drift,
            'energy_tolerance_exceeded': drift > cfg.energy_tolerance,
            'snapshots': len(trajectory.snapshots),
        }
        return store.EVENT_STATUS[trajectory.event.kind], summary
