import os

from waves import io_persist, quadrature
from waves.linear_wave import channel_energy, exterior_energy, psi_from_data, radiation_fields
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun


class Command(LabCommand):
    help = "Exact linear propagation: exterior energy channels and the radiation profiles of the data."
    kind = ExperimentRun.LINEAR_DEMO

    def run_experiment(self, run, cfg, recipe, resolved):
        parameters = resolved['experiment']
        data = self.build_data(cfg, recipe)
        psi = psi_from_data(data)

        rows = []
        for radius in parameters['radii']:
            for t in parameters['times']:
                rows.append((radius, t, channel_energy(data, radius, t, psi=psi)))
        io_persist.write_rows(os.path.join(run.output_dir, 'channels.csv'), ['R', 't', 'exterior_energy'], rows)

        plus, minus = radiation_fields(data, psi=psi)
        io_persist.write_rows(
            os.path.join(run.output_dir, 'radiation.csv'),
            ['eta', 'G_plus', 'G_minus'],
            zip(plus.eta_grid, plus.G, minus.G),
        )

        # channel identity: the t -> infinity limit outside R is 2 int_R G_+^2 dtau
        limits = {}
        for radius in parameters['radii']:
            outgoing = plus.eta_grid >= radius
            limits[str(radius)] = {
                'initial_exterior_energy': exterior_energy(data, radius),
                'radiation_limit': 2.0 * quadrature.integrate(plus.G[outgoing] ** 2, plus.d_eta),
            }
        summary = {
            'radiation_energy_plus': plus.energy(),
            'radiation_energy_minus': minus.energy(),
            'channels': limits,
        }
        return ExperimentRun.COMPLETED, summary
