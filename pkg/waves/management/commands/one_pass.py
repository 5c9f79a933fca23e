import logging
import os
from dataclasses import replace

import numpy as np

from waves import io_persist
from waves.diagnostics import h_norm
from waves.emden_fowler import stationary_family
from waves.exceptions import NoExit
from waves.experiments import one_pass_probe
from waves.initial_data import GAUSSIAN, STATIONARY_K, build_data, support_radius
from waves.management.commands._base import LabCommand
from waves.models import ExperimentRun

logger = logging.getLogger(__name__)


def sample_directions(count, seed):
    """
    Random Gaussian perturbation recipes, reproducible from the seed.
    """
    rng = np.random.default_rng(seed)
    return [
        {
            'kind': GAUSSIAN,
            'amplitude': float(rng.choice([-1.0, 1.0])),
            'center': float(rng.uniform(2.0, 4.0)),
            'width': float(rng.uniform(0.3, 0.6)),
            'velocity': float(rng.normal()),
        }
        for _ in range(count)
    ]


class Command(LabCommand):
    help = "Perturb Q_k in several directions and check that exiting solutions do not come back."
    kind = ExperimentRun.ONE_PASS

    def run_experiment(self, run, cfg, recipe, resolved):
        parameters = resolved['experiment']
        k = parameters['k']
        directions = sample_directions(parameters['directions'], parameters['seed'])
        reach = max(support_radius(direction) for direction in directions)
        cfg = replace(cfg, domain_end=max(cfg.domain_end, cfg.minimal_domain_end(reach)))

        q = stationary_family(cfg.m, k)[k]
        stationary = build_data({'kind': STATIONARY_K, 'k': k}, cfg.dr, cfg.domain_end, cfg.m)
        delta = parameters['delta_fraction'] * h_norm(stationary)
        epsilon = parameters['epsilon_fraction'] * h_norm(stationary) if parameters['epsilon_fraction'] else None

        rows = []
        results = []
        for index, direction in enumerate(directions):
            perturbation = build_data(direction, cfg.dr, cfg.domain_end, cfg.m)
            try:
                result = one_pass_probe(k, perturbation, delta, cfg, epsilon=epsilon,
                                        family_k_max=parameters['family_k_max'])
            except NoExit as exc:
                self.stdout.write(self.style.WARNING(f"Direction {index}: {exc}"))
                results.append({'direction': direction, 'no_exit': True})
                rows.append((index, 'no_exit', '', '', ''))
                continue
            closest = min(distance for _, distance in result.min_family_distance_after_exit)
            if result.revisit_detected:
                logger.warning("Direction %s re-entered the delta-neighbourhood of the family", index)
            results.append({'direction': direction, 'no_exit': False, **result.as_dict()})
            rows.append((index, result.event, result.exit_time, result.revisit_detected, closest))

        io_persist.write_rows(
            os.path.join(run.output_dir, 'one_pass.csv'),
            ['direction', 'event', 'exit_time', 'revisit_detected', 'min_family_distance'],
            rows,
        )
        summary = {'k': k, 'Q_norm': h_norm(stationary), 'delta': delta, 'domain_end': cfg.domain_end,
                   'c_k': q.c_k, 'directions': results}
        undecided = any(item['no_exit'] or item.get('revisit_detected') for item in results)
        return (ExperimentRun.UNDECIDED if undecided else ExperimentRun.COMPLETED), summary
