from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase, tag

from waves.diagnostics import h_norm
from waves.emden_fowler import dirichlet_and_potential, stationary_family
from waves.exceptions import InvalidRange, NoExit, NoTransitionInRange
from waves.experiments import (
    BLOW_UP,
    SCATTERING,
    UNDECIDED,
    channels_experiment,
    classify_amplitude,
    dichotomy_sweep,
    ground_state_threshold,
    one_pass_probe,
)
from waves.initial_data import gaussian, stationary_data
from waves.linear_wave import zero_field
from waves.nonlinear_wave import EvolutionConfig


def threshold_at(value):
    """
    Stand-in classifier: scattering below `value`, blow-up from it on.
    """
    def classify(base_data, amplitude, cfg, family_k_max=0):
        return (SCATTERING, 0.5) if amplitude < value else (BLOW_UP, 0.25)
    return classify


class GroundStateThresholdTests(SimpleTestCase):

    def test_energy_is_three_eighths_of_gradient(self):
        gradient, q_energy = ground_state_threshold(3)
        self.assertAlmostEqual(q_energy / gradient, 3.0 / 8.0, places=5)
        self.assertEqual(gradient, dirichlet_and_potential(stationary_family(3, 0)[0])[0])


class DichotomySweepTests(SimpleTestCase):
    """
    Tests for the amplitude sweep and its bisection, with the classifier mocked out.
    """

    def setUp(self):
        self.base = gaussian(1e-2, 10.0, amplitude=1.0, center=3.0, width=0.5)
        self.cfg = EvolutionConfig(dr=1e-2, t_final=1.0)

    @patch('waves.experiments.classify_amplitude')
    def test_bisection_brackets_the_transition(self, mock_classify):
        # Given: outcomes that change at amplitude 1.2
        mock_classify.side_effect = threshold_at(1.2)

        # When: sweeping a coarse grid
        result = dichotomy_sweep(self.base, [2.0, 1.0, 1.5], self.cfg, workers=1)

        # Then: the bracket contains 1.2 and is narrower than the requested width
        low, high = result.threshold_bracket
        self.assertTrue(low < 1.2 <= high)
        self.assertLessEqual((high - low) / high, 1e-3)
        self.assertEqual(result.bracket_distances, (0.5, 0.25))
        self.assertEqual(result.monotonicity_violations, [])
        self.assertFalse(result.undecided)
        self.assertEqual(result.lambda_grid, sorted(result.lambda_grid))
        self.assertEqual(len(result.energies), len(result.lambda_grid))
        self.assertAlmostEqual(result.ground_state['energy'] / result.ground_state['gradient'], 3.0 / 8.0, places=5)

    @patch('waves.experiments.classify_amplitude')
    def test_bisection_stops_after_budget(self, mock_classify):
        mock_classify.side_effect = threshold_at(1.2)
        with self.assertLogs('waves.experiments', level='WARNING'):
            result = dichotomy_sweep(self.base, [1.0, 2.0], self.cfg, workers=1, max_bisections=2)
        low, high = result.threshold_bracket
        self.assertEqual((low, high), (1.0, 1.25))

    @patch('waves.experiments.classify_amplitude')
    def test_single_outcome_has_no_transition(self, mock_classify):
        mock_classify.return_value = (SCATTERING, 1.0)
        with self.assertRaises(NoTransitionInRange):
            dichotomy_sweep(self.base, [0.1, 0.2, 0.3], self.cfg, workers=1)

    @patch('waves.experiments.classify_amplitude')
    def test_intermediate_regime_kept_out_of_the_bracket(self, mock_classify):
        """
        Test that the bracket pairs scattering with blow-up when undecided amplitudes lie between.
        """
        # Given: scattering below 1.0, undecided on [1.0, 1.2), blow-up from 1.2 on
        def classify(base_data, amplitude, cfg, family_k_max=0):
            if amplitude < 1.0:
                return SCATTERING, 0.5
            if amplitude < 1.2:
                return UNDECIDED, 0.1
            return BLOW_UP, 0.25
        mock_classify.side_effect = classify

        # When: sweeping a grid whose middle point is undecided
        with self.assertLogs('waves.experiments', level='WARNING'):
            result = dichotomy_sweep(self.base, [0.5, 1.1, 2.0], self.cfg, workers=1, max_bisections=40)

        # Then: both edges of the undecided window are resolved and the bracket spans it
        low, high = result.threshold_bracket
        self.assertTrue(1.0 - 2e-3 < low < 1.0)
        self.assertTrue(1.2 <= high < 1.2 + 2e-3)
        self.assertEqual(result.bracket_distances, (0.5, 0.25))
        self.assertTrue(result.intermediate)
        self.assertTrue(all(low < a < high and outcome == UNDECIDED for a, outcome in result.intermediate))
        self.assertTrue(result.undecided)

    @patch('waves.experiments.classify_amplitude')
    def test_blow_up_without_scattering_below_has_no_transition(self, mock_classify):
        def classify(base_data, amplitude, cfg, family_k_max=0):
            return (UNDECIDED, 0.1) if amplitude < 1.0 else (BLOW_UP, 0.0)
        mock_classify.side_effect = classify
        with self.assertRaises(NoTransitionInRange):
            dichotomy_sweep(self.base, [0.5, 2.0], self.cfg, workers=1)

    @patch('waves.experiments.classify_amplitude')
    def test_monotonicity_violations_reported(self, mock_classify):
        # Given: scattering on a window above a blow-up amplitude
        def classify(base_data, amplitude, cfg, family_k_max=0):
            return (SCATTERING, 0.0) if 1.5 <= amplitude <= 2.5 else (BLOW_UP, 0.0)
        mock_classify.side_effect = classify

        # When: sweeping across the window
        with self.assertLogs('waves.experiments', level='WARNING'):
            result = dichotomy_sweep(self.base, [1.0, 2.0, 3.0], self.cfg, workers=1)

        # Then: every scattering amplitude above a blow-up amplitude is listed
        self.assertIn((2.0, 1.0), result.monotonicity_violations)

    def test_invalid_grid(self):
        with self.assertRaises(InvalidRange):
            dichotomy_sweep(self.base, [], self.cfg)
        with self.assertRaises(InvalidRange):
            dichotomy_sweep(self.base, [-1.0, 1.0], self.cfg)


class OnePassTests(SimpleTestCase):

    def setUp(self):
        self.cfg = EvolutionConfig(dr=1e-2, t_final=0.5)

    def test_epsilon_must_exceed_delta(self):
        perturbation = gaussian(1e-2, 12.0)
        with self.assertRaises(InvalidRange):
            one_pass_probe(0, perturbation, 0.1, self.cfg, epsilon=0.05)

    def test_unperturbed_stationary_solution_does_not_exit(self):
        """
        Test that Q_0 with a zero perturbation stays in its neighbourhood.
        """
        with self.assertRaises(NoExit):
            one_pass_probe(0, zero_field(1e-2, 1101), 0.1, self.cfg)


class ChannelsExperimentTests(SimpleTestCase):

    def test_radius_below_one_rejected(self):
        with self.assertRaises(InvalidRange):
            channels_experiment(gaussian(1e-2, 8.0), 0.5, EvolutionConfig(dr=1e-2, t_final=1.0))

    def test_forward_channel_reaches_radiation_limit(self):
        """
        Test that the energy outside 1 + t approaches 2 int_1^inf G^2 of the extracted radiation.
        """
        # Given: small data whose incoming part has left by t = 5
        data = gaussian(1e-2, 14.0, amplitude=1e-2, center=3.0, width=0.5)

        # When: running both directions
        series = channels_experiment(data, 1.0, EvolutionConfig(dr=1e-2, t_final=5.0, snapshot_stride=50))

        # Then: the forward channel at t = 5 matches the radiation limit
        forward = [(t, value) for direction, t, value in series.rows if direction == 'forward']
        backward = [t for direction, t, _ in series.rows if direction == 'backward']
        self.assertAlmostEqual(forward[-1][0], 5.0)
        self.assertAlmostEqual(backward[-1], -5.0)
        self.assertLess(abs(forward[-1][1] - series.radiation_limit) / series.radiation_limit, 0.05)


@tag('slow')
class FullRunTests(SimpleTestCase):
    """
    Experiments run end to end without mocks.
    """

    def test_small_amplitude_scatters(self):
        base = gaussian(1e-2, 14.0, amplitude=1.0, center=3.0, width=0.5)
        outcome, closest = classify_amplitude(base, 0.01, EvolutionConfig(dr=1e-2, t_final=5.0, snapshot_stride=10))
        self.assertEqual(outcome, SCATTERING)
        self.assertGreater(closest, 0.0)

    def test_ground_state_pushed_outward_exits_once(self):
        """
        Test that Q_0 perturbed along itself leaves the neighbourhood and does not come back.
        """
        # Given: the perturbation direction Q_0, so the data are (1 + delta / ||Q_0||) Q_0
        direction = stationary_data(1e-2, 20.0, 0)
        delta = 1e-2 * h_norm(direction)

        # When: following the solution out of the neighbourhood
        result = one_pass_probe(0, direction, delta, EvolutionConfig(dr=1e-2, t_final=15.0))

        # Then: it exits and never returns within delta of the family
        self.assertGreater(result.exit_time, 0.0)
        self.assertFalse(result.revisit_detected)
        self.assertTrue(np.all(np.array([d for _, d in result.min_family_distance_after_exit]) > delta))

    def test_mirrored_perturbation_mirrors_the_distances(self):
        """
        Test that -Q_0 with the negated perturbation gives the same exit and family distances.
        """
        # Given: an outward perturbation of Q_0 and its mirror image
        direction = stationary_data(1e-2, 20.0, 0)
        delta = 1e-2 * h_norm(direction)
        cfg = EvolutionConfig(dr=1e-2, t_final=15.0)

        # When: following both solutions out of their neighbourhoods
        plus = one_pass_probe(0, direction, delta, cfg)
        minus = one_pass_probe(0, -direction, delta, cfg, sign=-1)

        # Then: the exit times and the distances to the family coincide
        self.assertEqual(minus.exit_time, plus.exit_time)
        self.assertEqual(minus.event, plus.event)
        np.testing.assert_allclose(
            [d for _, d in minus.min_family_distance_after_exit],
            [d for _, d in plus.min_family_distance_after_exit],
            rtol=1e-12,
        )

    def test_sweep_brackets_scattering_against_blow_up(self):
        """
        Test a real sweep on a coarse grid: the bracket pairs a scattering run with a blow-up run.
        """
        # Given: a bump that scatters at 0.01 and blows up at 3
        base = gaussian(1e-2, 14.0, amplitude=1.0, center=3.0, width=0.5)
        cfg = EvolutionConfig(dr=1e-2, t_final=5.0, snapshot_stride=10)

        # When: sweeping with a small bisection budget
        result = dichotomy_sweep(base, [0.01, 3.0], cfg, workers=1, max_bisections=4)

        # Then: the bracket edges carry the two outcomes and lie inside the grid
        low, high = result.threshold_bracket
        outcomes = dict(zip(result.lambda_grid, result.outcomes))
        self.assertEqual(outcomes[low], SCATTERING)
        self.assertEqual(outcomes[high], BLOW_UP)
        self.assertTrue(0.01 <= low < high <= 3.0)
        self.assertEqual(len(result.lambda_grid), 2 + 4)
