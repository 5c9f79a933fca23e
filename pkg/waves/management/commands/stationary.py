import os

import numpy as np

from waves import io_persist, store
from waves.emden_fowler import energy_of_Q, fowler_fit, pohozaev_gap, stationary_family
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun


class Command(LabCommand):
    help = "Build the stationary family Q_0..Q_k_max, store it and write its profile tables."
    kind = ExperimentRun.STATIONARY
    default_config = {'t_final': 0.0, 'data': {'kind': 'stationary_k'}}

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--fowler', action='store_true', help='Also fit the large-s laws of the zeros.')

    def run_experiment(self, run, cfg, recipe, resolved):
        parameters = resolved['experiment']
        family = stationary_family(cfg.m, parameters['k_max'], parameters['r_tab_max'])
        rows = []
        for profile in family:
            direct, scaled = energy_of_Q(profile)
            gap = pohozaev_gap(profile)
            store.record_stationary(profile, {'energy_direct': direct, 'energy_scaled': scaled, 'pohozaev_gap': gap})
            io_persist.write_profile(profile, os.path.join(run.output_dir, f"Q_{profile.k}.csv"))
            rows.append((profile.k, profile.s_k, profile.c_k, direct, scaled, gap))
            self.stdout.write(f"Q_{profile.k}: s_k={profile.s_k:.10g} c_k={profile.c_k:.10g} E={direct:.10g}")
        io_persist.write_rows(
            os.path.join(run.output_dir, 'stationary.csv'),
            ['k', 's_k', 'c_k', 'E_direct', 'E_scaled', 'pohozaev_gap'],
            rows,
        )

        energies = [row[3] for row in rows]
        summary = {
            'family': [dict(zip(['k', 's_k', 'c_k', 'E_direct', 'E_scaled', 'pohozaev_gap'], row)) for row in rows],
            'energies_increasing': bool(np.all(np.diff(energies) > 0)),
        }
        if not summary['energies_increasing']:
            self.stdout.write(self.style.WARNING("Energies of the family are not strictly increasing."))
        if self.options['fowler']:
            fit = fowler_fit(cfg.m)
            summary['fowler'] = {
                'spacing_slope': fit.spacing_slope,
                'expected_slope': fit.expected_slope,
                'amplitude_spread': fit.amplitude_spread,
                'fitted_A': fit.fitted_A,
            }
        return ExperimentRun.COMPLETED, summary
