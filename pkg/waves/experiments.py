"""
Dynamical experiments: ground-state dichotomy sweep, one-pass exit test and energy channels.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from waves import quadrature
from waves.diagnostics import (
    Classification,
    energy,
    extract_radiation,
    family_targets,
    h_distance,
    h_norm,
    resolution_report,
    target_field,
)
from waves.emden_fowler import dirichlet_and_potential, stationary_family
from waves.exceptions import InvalidRange, NoExit, NoTransitionInRange, NotApplicable
from waves.nonlinear_wave import EventKind, evolve_nonlinear

logger = logging.getLogger(__name__)

SCATTERING = 'scattering'
BLOW_UP = 'blow_up'
CONVERGES_TO_Q = 'converges_to_q'
UNDECIDED = 'undecided'
NUMERICAL_FAILURE = 'numerical_failure'

BISECTION_WIDTH = 1e-3
MAX_BISECTIONS = 12


def ground_state_threshold(m=3):
    """
    (int |grad Q_0|^2, E(Q_0, 0)): the two quantities the dichotomy is stated against.
    """
    q0 = stationary_family(m, 0)[0]
    gradient, _ = dirichlet_and_potential(q0)
    return gradient, q0.energy


def classify_amplitude(base_data, amplitude, cfg, family_k_max=0):
    """
    Evolve amplitude * base_data and return (outcome, closest approach to +-Q_0).
    Runs in worker processes, so it only touches numerics.
    """
    trajectory = evolve_nonlinear(base_data.scaled(amplitude), cfg)
    q0 = stationary_family(cfg.m, 0)[0]
    closest = min(
        min(h_distance(snapshot, (sign, q0)) for sign in (1, -1)) for snapshot in trajectory.snapshots
    )
    if trajectory.event.kind == EventKind.BLOW_UP:
        return BLOW_UP, closest
    if trajectory.event.kind == EventKind.NUMERICAL_FAILURE:
        return NUMERICAL_FAILURE, closest
    report = resolution_report(trajectory, family_k_max)
    if report.classification == Classification.SCATTERING:
        return SCATTERING, closest
    if report.classification == Classification.CONVERGES_TO_Q:
        return CONVERGES_TO_Q, closest
    return UNDECIDED, closest


@dataclass
class SweepResult:
    """
    Outcomes of an amplitude sweep, keyed by amplitude, with the bracketed transition.
    """
    lambda_grid: list
    outcomes: list
    energies: list
    gradient_norms: list
    threshold_bracket: tuple
    bracket_distances: tuple
    ground_state: dict
    monotonicity_violations: list = field(default_factory=list)
    intermediate: list = field(default_factory=list)

    @property
    def undecided(self):
        return any(outcome in (UNDECIDED, NUMERICAL_FAILURE) for outcome in self.outcomes)

    def as_dict(self):
        return {
            'lambda_grid': self.lambda_grid,
            'outcomes': self.outcomes,
            'energies': self.energies,
            'gradient_norms': self.gradient_norms,
            'threshold_bracket': list(self.threshold_bracket),
            'bracket_distances': list(self.bracket_distances),
            'ground_state': self.ground_state,
            'monotonicity_violations': self.monotonicity_violations,
            'intermediate': self.intermediate,
        }


def _evaluate(base_data, amplitudes, cfg, family_k_max, workers):
    if workers and workers > 1 and len(amplitudes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {
                amplitude: executor.submit(classify_amplitude, base_data, amplitude, cfg, family_k_max)
                for amplitude in amplitudes
            }
            return {amplitude: future.result() for amplitude, future in futures.items()}
    return {amplitude: classify_amplitude(base_data, amplitude, cfg, family_k_max) for amplitude in amplitudes}


def _initial_bracket(amplitudes, outcomes):
    """
    The first blow-up amplitude that has a scattering amplitude below it, paired with the
    largest such scattering amplitude.
    """
    last_scattering = None
    for amplitude, outcome in zip(amplitudes, outcomes):
        if outcome == SCATTERING:
            last_scattering = amplitude
        elif outcome == BLOW_UP and last_scattering is not None:
            return last_scattering, amplitude
    raise NoTransitionInRange(
        f"no scattering amplitude below a blow-up amplitude; outcomes {dict(zip(amplitudes, outcomes))}"
    )


def dichotomy_sweep(base_data, lambda_grid, cfg, family_k_max=0, workers=1,
                    relative_width=BISECTION_WIDTH, max_bisections=MAX_BISECTIONS):
    """
    Classify every amplitude of the grid, then bisect a scattering / blow-up pair to the
    requested relative bracket width. Amplitudes with any other outcome inside the bracket are
    kept as an intermediate regime: the bisection then narrows its two edges separately and the
    bracket never ends on one of them.
    """
    if not lambda_grid or min(lambda_grid) <= 0:
        raise InvalidRange("the amplitude grid must hold positive values")
    m = cfg.m
    results = _evaluate(base_data, sorted(set(lambda_grid)), cfg, family_k_max, workers)
    amplitudes = sorted(results)
    low, high = _initial_bracket(amplitudes, [results[a][0] for a in amplitudes])
    inner = [a for a in amplitudes if low < a < high]

    bisections = 0
    while bisections < max_bisections:
        if inner:
            left_gap = (min(inner) - low) / high
            right_gap = (high - max(inner)) / high
            if max(left_gap, right_gap) <= relative_width:
                break
            middle = 0.5 * (low + min(inner)) if left_gap >= right_gap else 0.5 * (max(inner) + high)
        else:
            if (high - low) / high <= relative_width:
                break
            middle = 0.5 * (low + high)
        results.update(_evaluate(base_data, [middle], cfg, family_k_max, 1))
        bisections += 1
        outcome = results[middle][0]
        if outcome == BLOW_UP:
            high = middle
        elif outcome == SCATTERING:
            low = middle
        else:
            inner.append(middle)
        inner = [a for a in inner if low < a < high]
        logger.debug("Bisection %s: %s at %.8g, bracket [%.8g, %.8g]", bisections, outcome, middle, low, high)

    intermediate = [(a, results[a][0]) for a in sorted(inner)]
    if intermediate:
        logger.warning("Intermediate outcomes inside the bracket [%.8g, %.8g]: %s", low, high, intermediate)
    elif (high - low) / high > relative_width:
        logger.warning("Bracket width %.3e above the requested %.1e after %s bisections",
                       (high - low) / high, relative_width, bisections)

    amplitudes = sorted(results)
    outcomes = [results[a][0] for a in amplitudes]
    violations = [
        (a, b) for a in amplitudes for b in amplitudes
        if a > b and results[a][0] == SCATTERING and results[b][0] == BLOW_UP
    ]
    for violation in violations:
        logger.warning("Monotonicity violation: scattering at %.8g above blow-up at %.8g", *violation)

    q_gradient, q_energy = ground_state_threshold(m)
    energies = [energy(base_data.scaled(a), m) for a in amplitudes]
    gradients = [quadrature.dirichlet_integral(a * base_data.u, base_data.dr) for a in amplitudes]
    logger.info("Dichotomy bracket [%.8g, %.8g] after %s bisections", low, high, bisections)
    return SweepResult(
        lambda_grid=amplitudes,
        outcomes=outcomes,
        energies=energies,
        gradient_norms=gradients,
        threshold_bracket=(low, high),
        bracket_distances=(results[low][1], results[high][1]),
        ground_state={
            'gradient': q_gradient,
            'energy': q_energy,
            'norm': float(np.sqrt(q_gradient)),
        },
        monotonicity_violations=violations,
        intermediate=intermediate,
    )


@dataclass
class OnePassResult:
    """
    Exit from the delta-neighbourhood of Q_k past epsilon, then the distance to the family.
    """
    delta_in: float
    epsilon_out: float
    exit_time: float
    revisit_detected: bool
    min_family_distance_after_exit: list
    event: str

    def as_dict(self):
        return {
            'delta_in': self.delta_in,
            'epsilon_out': self.epsilon_out,
            'exit_time': self.exit_time,
            'revisit_detected': self.revisit_detected,
            'min_family_distance_after_exit': self.min_family_distance_after_exit,
            'event': self.event,
        }


def one_pass_probe(k, perturbation, delta, cfg, epsilon=None, sign=1, family_k_max=None):
    """
    Evolve (sign * Q_k, 0) + perturbation with the perturbation scaled to norm delta, find the
    first time the distance to sign * Q_k exceeds epsilon, then follow the distance to the
    nearest member of {0, +-Q_j}.
    """
    epsilon = epsilon if epsilon is not None else 10.0 * delta
    if not epsilon > delta >= 0:
        raise InvalidRange(f"epsilon={epsilon} must exceed delta={delta} >= 0")
    family_k_max = k if family_k_max is None else family_k_max
    q = stationary_family(cfg.m, max(k, family_k_max))[k]

    size = h_norm(perturbation)
    scaled = perturbation.scaled(delta / size) if size > 0 else perturbation
    stationary = target_field((sign, q), scaled)
    trajectory = evolve_nonlinear(stationary + scaled, cfg)

    exit_index = next(
        (i for i, snapshot in enumerate(trajectory.snapshots) if h_distance(snapshot, (sign, q)) > epsilon),
        None,
    )
    if exit_index is None:
        raise NoExit(f"the solution stayed within {epsilon:.3g} of Q_{k} up to t={trajectory.times[-1]:.6g}")

    targets = family_targets(cfg.m, family_k_max)
    distances = [
        (snapshot.time_tag, min(h_distance(snapshot, target) for target in targets))
        for snapshot in trajectory.snapshots[exit_index:]
    ]
    revisit = any(distance <= delta for _, distance in distances)
    logger.info("One-pass run around Q_%s: exit at t=%.6g, revisit=%s", k, trajectory.times[exit_index], revisit)
    return OnePassResult(
        delta_in=delta,
        epsilon_out=epsilon,
        exit_time=trajectory.times[exit_index],
        revisit_detected=revisit,
        min_family_distance_after_exit=distances,
        event=trajectory.event.kind.value,
    )


@dataclass
class ChannelSeries:
    """
    Exterior energy outside r = R + |t| for the forward and backward runs.
    `radiation_limit` is the forward channel predicted by the extracted radiation, when it exists.
    """
    radius: float
    rows: list
    radiation_limit: float = None

    def as_rows(self):
        return [(direction, t, value) for direction, t, value in self.rows]


def exterior_field_energy(field, radius):
    """
    Integral over r >= radius of (u_r^2 + ut^2) r^2, harmonic tail included.
    """
    start = quadrature.index_at(radius, field.dr, len(field.u))
    return quadrature.dirichlet_integral(field.u, field.dr, start) + quadrature.kinetic_integral(field.ut, field.dr, start)


def channels_experiment(data, radius, cfg):
    """
    Forward and backward (time-reversed data) runs; per snapshot the energy outside R + |t|.
    """
    if radius < 1.0:
        raise InvalidRange(f"radius must be at least 1, got {radius}")
    rows = []
    limit = None
    for direction, start in (('forward', data), ('backward', data.time_reversed())):
        trajectory = evolve_nonlinear(start, cfg)
        orientation = 1.0 if direction == 'forward' else -1.0
        for snapshot in trajectory.snapshots:
            t = snapshot.time_tag - data.time_tag
            rows.append((direction, orientation * t, exterior_field_energy(snapshot, radius + abs(t))))
        if direction == 'forward' and not trajectory.blew_up and len(trajectory.snapshots) > 1:
            try:
                radiation = extract_radiation(trajectory, trajectory.times[-1])
            except NotApplicable:
                radiation = None
            if radiation is not None:
                outgoing = radiation.eta_grid >= radius
                limit = 2.0 * quadrature.integrate(radiation.G[outgoing] ** 2, radiation.d_eta)
    return ChannelSeries(radius=radius, rows=rows, radiation_limit=limit)
