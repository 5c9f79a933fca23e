import os

from waves import io_persist
from waves.experiments import channels_experiment
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun


class Command(LabCommand):
    help = "Energy outside R + |t| along the forward and backward nonlinear evolutions."
    kind = ExperimentRun.CHANNELS

    def run_experiment(self, run, cfg, recipe, resolved):
        radius = resolved['experiment']['radius']
        data = self.build_data(cfg, recipe)
        series = channels_experiment(data, radius, cfg)
        io_persist.write_rows(os.path.join(run.output_dir, 'channels.csv'), ['direction', 't', 'exterior_energy'],
                              series.as_rows())
        forward = [value for direction, _, value in series.rows if direction == 'forward']
        summary = {
            'radius': radius,
            'radiation_limit': series.radiation_limit,
            'final_forward_energy': forward[-1] if forward else None,
            'rows': len(series.rows),
        }
        return ExperimentRun.COMPLETED, summary
