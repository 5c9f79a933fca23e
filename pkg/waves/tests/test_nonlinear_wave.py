from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase, tag
from scipy.special import beta

from waves import quadrature
from waves.diagnostics import energy, h_distance
from waves.emden_fowler import stationary_family
from waves.exceptions import InvalidField, InvalidRange, NotApplicable
from waves.initial_data import GAUSSIAN, gaussian, stationary_data, support_radius
from waves.linear_wave import RadialField, evolve_linear
from waves.nonlinear_wave import (
    EventKind,
    EvolutionConfig,
    Trajectory,
    detect_blowup,
    evolve_nonlinear,
    field_energy,
    small_data_deviation,
)


def smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return 6.0 * x ** 5 - 15.0 * x ** 4 + 10.0 * x ** 3


def flat_bump(dr, r_end=16.0):
    """
    u0 = 1 on [4, 12], smooth transitions on [2, 4] and [12, 14], u1 = 0.
    """
    r = quadrature.grid(dr, int(round((r_end - 1.0) / dr)) + 1)
    u = smoothstep((r - 2.0) / 2.0) * (1.0 - smoothstep((r - 12.0) / 2.0))
    return RadialField(dr=dr, u=u, ut=np.zeros_like(u))


class EvolutionConfigTests(SimpleTestCase):
    """
    Tests for the validation of the run parameters.
    """

    def test_invalid_parameters_rejected(self):
        with self.assertRaises(InvalidRange):
            EvolutionConfig(m=2)
        with self.assertRaises(InvalidRange):
            EvolutionConfig(dr=0.0)
        with self.assertRaises(InvalidRange):
            EvolutionConfig(t_final=-1.0)
        with self.assertRaises(InvalidRange):
            EvolutionConfig(snapshot_stride=0)

    def test_steps_and_causal_bound(self):
        cfg = EvolutionConfig(dr=0.01, t_final=2.0)
        self.assertEqual(cfg.dt, cfg.dr)
        self.assertEqual(cfg.steps, 200)
        self.assertAlmostEqual(cfg.minimal_domain_end(5.0), 7.02)

    def test_data_grid_must_match(self):
        data = gaussian(0.01, 8.0)
        with self.assertRaises(InvalidRange):
            evolve_nonlinear(data, EvolutionConfig(dr=0.02, t_final=1.0))

    def test_extension_needs_vanishing_velocity(self):
        # Given: data whose velocity is non-zero at the end of the grid
        data = RadialField(dr=0.1, u=np.zeros(11), ut=np.ones(11))

        # When / Then: extending the grid to domain_end fails
        with self.assertRaises(InvalidField):
            evolve_nonlinear(data, EvolutionConfig(dr=0.1, t_final=1.0, domain_end=5.0))


class NonlinearEvolutionTests(SimpleTestCase):
    """
    Tests for the leapfrog solver on w = r u.
    """

    def test_snapshots_follow_stride(self):
        """
        Test that snapshots are taken every snapshot_stride steps and at the final time.
        """
        data = gaussian(0.01, 8.0, amplitude=0.05, center=3.0, width=0.3)
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=0.01, t_final=1.0, snapshot_stride=25))

        self.assertEqual(trajectory.event.kind, EventKind.COMPLETED)
        np.testing.assert_allclose(trajectory.times, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
        self.assertEqual(len(trajectory.energy_log), len(trajectory.snapshots))
        for snapshot in trajectory.snapshots:
            self.assertEqual(snapshot.u[0], 0.0)

    def test_zero_time_returns_data(self):
        data = gaussian(0.01, 8.0)
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=0.01, t_final=0.0))
        self.assertEqual(trajectory.event.kind, EventKind.COMPLETED)
        self.assertEqual(len(trajectory.snapshots), 1)
        np.testing.assert_allclose(trajectory.snapshots[0].u, data.u, rtol=1e-14, atol=0.0)

    def test_domain_extension_holds_the_tail(self):
        """
        Test that the grid is extended to domain_end.
        """
        data = gaussian(0.01, 8.0, amplitude=0.05)
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=0.01, t_final=0.5, domain_end=10.0))
        self.assertAlmostEqual(trajectory.snapshots[-1].r_end, 10.0)

    def test_energy_conserved(self):
        """
        Test that the energy drift of a moderate bump stays below 1e-4 at dr = 1e-3.
        """
        # Given: a bump of amplitude 0.5 on a grid wide enough to hold it for t = 5
        data = gaussian(1e-3, 15.0, amplitude=0.5, center=4.0, width=0.5)

        # When: evolving it
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=1e-3, t_final=5.0, snapshot_stride=100))

        # Then: it completes and the energy is conserved
        self.assertEqual(trajectory.event.kind, EventKind.COMPLETED)
        self.assertLess(trajectory.max_energy_drift(), 1e-4)

    def test_linear_mode_matches_exact_propagator(self):
        """
        Test that the scheme without the source reproduces the d'Alembert solution at dt = dr.
        """
        # Given: zero-velocity data far enough from the right end
        data = gaussian(0.01, 12.0, amplitude=1.0, center=4.0, width=0.3)

        # When: evolving with the source switched off and with the exact propagator
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=0.01, t_final=2.0, snapshot_stride=50), linear=True)
        exact = evolve_linear(data, 2.0)

        # Then: both agree on the common grid
        u = trajectory.snapshots[-1].u
        np.testing.assert_allclose(u, exact.u[:len(u)], atol=1e-5 * np.max(np.abs(data.u)))

    def test_stationary_solution_converges_at_second_order(self):
        """
        Test that the distance from Q_0 after t = 1 shrinks by about 4 when dr is halved.
        """
        q0 = stationary_family(3, 0)[0]
        errors = []
        for dr in (1e-2, 5e-3):
            # Given: (Q_0, 0) on [1, 20]
            data = stationary_data(dr, 20.0, 0)

            # When: evolving to t = 1
            trajectory = evolve_nonlinear(data, EvolutionConfig(dr=dr, t_final=1.0, snapshot_stride=10))

            # Then: the solution has moved from Q_0 only by the discretisation error
            self.assertEqual(trajectory.event.kind, EventKind.COMPLETED)
            errors.append(h_distance(trajectory.snapshots[-1], (1, q0)))

        ratio = errors[0] / errors[1]
        self.assertTrue(3.0 < ratio < 5.0, f"convergence ratio {ratio}")

    def test_sign_symmetry(self):
        """
        Test that negated data evolve into the negated solution.
        """
        # Given: a bump and its negative
        data = gaussian(1e-2, 12.0, amplitude=0.8, center=4.0, width=0.4, velocity=0.3)
        cfg = EvolutionConfig(dr=1e-2, t_final=3.0, snapshot_stride=50)

        # When: evolving both
        plus = evolve_nonlinear(data, cfg)
        minus = evolve_nonlinear(-data, cfg)

        # Then: every snapshot is mirrored and the energies coincide
        self.assertEqual(plus.event, minus.event)
        for a, b in zip(plus.snapshots, minus.snapshots):
            np.testing.assert_array_equal(b.u, -a.u)
            np.testing.assert_array_equal(b.ut, -a.ut)
        self.assertEqual(plus.energy_log, minus.energy_log)

    def test_finite_speed_of_propagation(self):
        """
        Test that data supported in r <= b leave r > b + t untouched.
        """
        # Given: a truncated bump with support radius b
        reach = support_radius({'kind': GAUSSIAN, 'center': 4.0, 'width': 0.4})
        data = gaussian(1e-2, 16.0, amplitude=0.8, center=4.0, width=0.4)

        # When: evolving past a few snapshot times
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=1e-2, t_final=3.0, snapshot_stride=50))

        # Then: each snapshot vanishes identically outside the cone
        for snapshot in trajectory.snapshots:
            outside = snapshot.grid > reach + snapshot.time_tag + 0.05
            self.assertTrue(np.any(outside))
            self.assertFalse(np.any(snapshot.u[outside]))
            self.assertFalse(np.any(snapshot.ut[outside]))

    def test_scaled_ground_state_blows_up(self):
        """
        Test that 1.5 Q_0, which has negative energy, blows up.
        """
        # Given: (1.5 Q_0, 0)
        data = stationary_data(1e-2, 12.0, 0).scaled(1.5)
        self.assertLess(energy(data), 0.0)

        # When: evolving
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=1e-2, t_final=10.0))

        # Then: the run stops with a blow-up event
        self.assertEqual(trajectory.event.kind, EventKind.BLOW_UP)
        self.assertTrue(trajectory.blew_up)
        self.assertLess(trajectory.event.time, 10.0)

    def test_flat_bump_blows_up_at_ode_time(self):
        """
        Test that u0 = 1 on a wide plateau blows up when y'' = y^7, y(0) = 1, y'(0) = 0 does.
        """
        # Given: the blow-up time of the ODE, 1/4 B(3/8, 1/2)
        expected = 0.25 * beta(3.0 / 8.0, 0.5)

        # When: evolving the plateau data
        trajectory = evolve_nonlinear(flat_bump(5e-3), EvolutionConfig(dr=5e-3, t_final=2.0))

        # Then: blow-up is detected within 5% of that time
        self.assertEqual(trajectory.event.kind, EventKind.BLOW_UP)
        self.assertLess(abs(trajectory.event.time - expected) / expected, 0.05)


class SmallDataTests(SimpleTestCase):
    """
    Tests for the deviation from the linear flow at small amplitude.
    """

    def test_deviation_scales_with_seventh_power(self):
        """
        Test that doubling eps multiplies the deviation by about 2^7.
        """
        # Given: unit bump data
        data = gaussian(1e-2, 12.0, amplitude=1.0, center=3.0, width=0.5)

        # When: measuring the deviation at eps and 2 eps
        small = small_data_deviation(data, 0.1, 3.0)
        large = small_data_deviation(data, 0.2, 3.0)

        # Then: the ratio is close to 128
        self.assertGreater(small, 0.0)
        self.assertTrue(64.0 < large / small < 256.0, f"deviation ratio {large / small}")

    def test_deviation_halving_across_three_amplitudes(self):
        """
        Test that each halving of eps divides the deviation by about 2^7.
        """
        # Given: unit bump data
        data = gaussian(1e-2, 12.0, amplitude=1.0, center=3.0, width=0.5)

        # When: measuring the deviation at eps = 0.1, 0.05, 0.025
        deviations = [small_data_deviation(data, eps, 3.0) for eps in (0.1, 0.05, 0.025)]

        # Then: both consecutive ratios are close to 128
        for larger, smaller in zip(deviations[:-1], deviations[1:]):
            self.assertGreater(smaller, 0.0)
            self.assertTrue(64.0 < larger / smaller < 256.0, f"deviation ratio {larger / smaller}")

    def test_zero_eps_has_no_deviation(self):
        self.assertEqual(small_data_deviation(gaussian(1e-2, 8.0), 0.0, 1.0), 0.0)

    def test_large_data_not_applicable(self):
        data = stationary_data(1e-2, 12.0, 0)
        with self.assertRaises(NotApplicable):
            small_data_deviation(data, 1.5, 10.0)


class TrajectoryTests(SimpleTestCase):
    """
    Tests for blow-up detection and snapshot lookup.
    """

    def test_detect_blowup(self):
        cfg = EvolutionConfig(blowup_threshold=10.0)
        self.assertFalse(detect_blowup(SimpleNamespace(u=np.array([0.0, 9.0]), ut=np.zeros(2)), cfg))
        self.assertTrue(detect_blowup(SimpleNamespace(u=np.array([0.0, -11.0]), ut=np.zeros(2)), cfg))
        self.assertTrue(detect_blowup(SimpleNamespace(u=np.zeros(2), ut=np.array([0.0, np.nan])), cfg))

    def test_evolution_stops_where_detection_fires(self):
        """
        Test that the run ends with BLOW_UP at the first level detect_blowup flags.
        """
        # Given: a threshold just below the initial peak
        data = gaussian(1e-2, 8.0, amplitude=0.5)
        cfg = EvolutionConfig(dr=1e-2, t_final=1.0, blowup_threshold=0.9 * np.max(np.abs(data.u)))

        # When: evolving
        trajectory = evolve_nonlinear(data, cfg)

        # Then: the data themselves trip the detector and the run stops after one step
        self.assertTrue(detect_blowup(data, cfg))
        self.assertEqual(trajectory.event.kind, EventKind.BLOW_UP)
        self.assertAlmostEqual(trajectory.event.time, cfg.dt)

    def test_overflow_on_the_last_step_is_a_failure(self):
        """
        Test that a level whose successor overflows is not reported as completed.
        """
        # Given: data whose first step stays finite but whose second overflows, and no threshold
        data = gaussian(0.1, 6.0, amplitude=1e43, center=3.0, width=0.5)
        cfg = EvolutionConfig(dr=0.1, t_final=0.1, blowup_threshold=np.inf)

        # When: running the single step
        trajectory = evolve_nonlinear(data, cfg)

        # Then: the run ends in a numerical failure and records no non-finite snapshot
        self.assertEqual(trajectory.event.kind, EventKind.NUMERICAL_FAILURE)
        self.assertEqual(len(trajectory.snapshots), 1)

    def test_snapshot_lookup(self):
        data = gaussian(0.01, 8.0, amplitude=0.05)
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=0.01, t_final=1.0, snapshot_stride=50))
        self.assertAlmostEqual(trajectory.snapshot_at(0.502).time_tag, 0.5)
        with self.assertRaises(InvalidRange):
            trajectory.snapshot_at(0.3)

    def test_empty_trajectory(self):
        trajectory = Trajectory(config=EvolutionConfig())
        self.assertEqual(trajectory.max_energy_drift(), 0.0)
        with self.assertRaises(NotApplicable):
            trajectory.snapshot_at(0.0)

    def test_field_energy_of_zero_field(self):
        self.assertEqual(field_energy(np.zeros(10), np.zeros(10), 0.1, 3), 0.0)


@tag('slow')
class HighResolutionTests(SimpleTestCase):
    """
    Checks at the production resolution dr = 1e-3.
    """

    def test_stationary_solution_stays_close(self):
        q0 = stationary_family(3, 0)[0]
        data = stationary_data(1e-3, 20.0, 0)
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=1e-3, t_final=2.0))
        self.assertLess(h_distance(trajectory.snapshots[-1], (1, q0)), 1e-3 * h_distance(data))

    def test_energy_drift_over_long_run(self):
        data = gaussian(1e-3, 30.0, amplitude=0.5, center=4.0, width=0.5)
        trajectory = evolve_nonlinear(data, EvolutionConfig(dr=1e-3, t_final=20.0, snapshot_stride=500))
        self.assertEqual(trajectory.event.kind, EventKind.COMPLETED)
        self.assertLess(trajectory.max_energy_drift(), 1e-4)
