"""
Energy-space functionals, distances to the stationary family, radiation
extraction, the Sobolev quotient and the virial quantity.
"""
import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from waves import quadrature
from waves.emden_fowler import stationary_family
from waves.exceptions import DegenerateInput, InsufficientData, InvalidRange, NotApplicable
from waves.linear_wave import RadialField, RadiationProfile, data_from_radiation
from waves.nonlinear_wave import field_energy

logger = logging.getLogger(__name__)

SCATTERING_THRESHOLD = 1e-2
STATIONARY_THRESHOLD = 1e-2
DEFAULT_FAMILY_K_MAX = 4
LATE_FRACTION = 0.8


def energy(field, m=3):
    """
    E(u, ut) = 1/2 int |grad u|^2 + 1/2 int ut^2 - 1/(2m+2) int |u|^(2m+2).
    """
    return field_energy(field.u, field.ut, field.dr, m)


def h_norm(field):
    """
    ||(u, ut)|| in the energy space, harmonic tail included.
    """
    return float(np.sqrt(quadrature.dirichlet_integral(field.u, field.dr) + quadrature.kinetic_integral(field.ut, field.dr)))


def target_field(target, reference):
    """
    The target (sign * Q, 0) evaluated on the grid of `reference`; zero when target is None.
    """
    if target is None:
        return RadialField(dr=reference.dr, u=np.zeros_like(reference.u), ut=np.zeros_like(reference.ut))
    sign, profile = target
    return RadialField(dr=reference.dr, u=sign * profile.value(reference.grid), ut=np.zeros_like(reference.ut))


def h_distance(field, target=None):
    """
    ||(u - sign Q, ut)|| for target = (sign, StationaryProfile), or ||(u, ut)|| for target None.
    """
    if target is None:
        return h_norm(field)
    return h_norm(field - target_field(target, field))


def field_distance(first, second):
    return h_norm(first - second)


def family_targets(m=3, k_max=DEFAULT_FAMILY_K_MAX):
    """
    [None, (+1, Q_0), (-1, Q_0), ..., (+1, Q_k_max), (-1, Q_k_max)].
    """
    targets = [None]
    for profile in stationary_family(m, k_max):
        targets.extend([(1, profile), (-1, profile)])
    return targets


def describe_target(target):
    if target is None:
        return 'zero'
    sign, profile = target
    return f"{'+' if sign > 0 else '-'}Q{profile.k}"


def radiation_estimators(field, t):
    """
    The two pointwise estimators of the outgoing radiation at time t on eta = r - t:
    d/dr (r u) and -r ut.
    """
    r = field.grid
    spatial = quadrature.radial_derivative(r * field.u, field.dr)
    temporal = -r * field.ut
    return spatial, temporal


def _extract(field, t):
    spatial, temporal = radiation_estimators(field, t)
    average = 0.5 * (spatial + temporal)
    scale = np.sqrt(quadrature.integrate(average ** 2, field.dr))
    gap = np.sqrt(quadrature.integrate((spatial - temporal) ** 2, field.dr))
    disagreement = float(gap / scale) if scale > 0 else 0.0
    return RadiationProfile(eta0=1.0 - t, d_eta=field.dr, G=average, sign_tag='+', disagreement=disagreement)


def extract_radiation(traj, t_extract, min_fraction=LATE_FRACTION, target=None):
    """
    G(eta) = 1/2 [d/dr (r u) - r ut](T, eta + T) from the snapshot at T = t_extract,
    after subtracting the stationary target (sign, Q) when one is given.
    """
    if traj.blew_up:
        raise NotApplicable(f"trajectory ended with {traj.event.kind.value}; no radiation field")
    t_final = traj.times[-1]
    if t_extract < min_fraction * t_final:
        raise InvalidRange(f"t_extract={t_extract} is below {min_fraction} * t_final={t_final}")
    snapshot = traj.snapshot_at(t_extract)
    if target is not None:
        snapshot = snapshot - target_field(target, snapshot)
    profile = _extract(snapshot, snapshot.time_tag)
    logger.debug("Extracted radiation at t=%.6g, estimator disagreement %.3e", snapshot.time_tag, profile.disagreement)
    return profile


def estimator_disagreement(traj, times):
    """
    Relative L2 gap between the two radiation estimators at each requested snapshot time.
    """
    return [(t, _extract(traj.snapshot_at(t), t).disagreement) for t in times]


class Classification(str, enum.Enum):
    SCATTERING = 'scattering'
    CONVERGES_TO_Q = 'converges_to_q'
    UNDECIDED = 'undecided'


@dataclass
class ResolutionReport:
    """
    Outcome of the soliton-resolution scan of one trajectory.
    """
    chosen_Q: str
    classification: Classification
    residual_history: list = field(default_factory=list)
    radiation_energy: float = 0.0
    relative_residual: float = 0.0
    data_norm: float = 0.0
    estimator_disagreement: float = 0.0
    energy_split: dict = field(default_factory=dict)
    candidates: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            'classification': self.classification.value,
            'chosen_Q': self.chosen_Q,
            'relative_residual': self.relative_residual,
            'residual_history': self.residual_history,
            'radiation_energy': self.radiation_energy,
            'data_norm': self.data_norm,
            'estimator_disagreement': self.estimator_disagreement,
            'energy_split': self.energy_split,
            'candidates': self.candidates,
            'thresholds': self.thresholds,
        }


def _residual_history(traj, target, radiation, late_snapshots):
    history = []
    for snapshot in late_snapshots:
        free = data_from_radiation(radiation.shifted(snapshot.time_tag), r_max=snapshot.r_end)
        free = RadialField(dr=snapshot.dr, u=free.u[:len(snapshot.u)], ut=free.ut[:len(snapshot.ut)])
        history.append((snapshot.time_tag, h_norm(snapshot - free - target_field(target, snapshot))))
    return history


def resolution_report(traj, family_k_max=DEFAULT_FAMILY_K_MAX, late_fraction=LATE_FRACTION, t_extract=None,
                      scattering_threshold=SCATTERING_THRESHOLD, stationary_threshold=STATIONARY_THRESHOLD):
    """
    Scan Q in {0} and {+-Q_k, k <= family_k_max}: for each candidate extract the radiation of u - Q at
    t_extract (default: the final time), rebuild the free wave v_L by translating that profile, and measure
    ||u(t) - v_L(t) - Q|| over the late snapshots. Each candidate is scored by its largest residual over
    that window; the minimiser is classified against the thresholds, which are relative to the norm of
    the data.
    """
    if traj.blew_up:
        raise NotApplicable(f"trajectory ended with {traj.event.kind.value}; resolution needs a global run")
    m = traj.config.m
    t_final = traj.times[-1]
    late = [snapshot for snapshot in traj.snapshots if snapshot.time_tag >= late_fraction * t_final]
    data_norm = h_norm(traj.snapshots[0])

    candidates = {}
    best = None
    for target in family_targets(m, family_k_max):
        radiation = extract_radiation(traj, t_final if t_extract is None else t_extract, min_fraction=late_fraction, target=target)
        history = _residual_history(traj, target, radiation, late)
        # the residual vanishes at t_extract by construction
        worst = max(value for _, value in history)
        candidates[describe_target(target)] = worst
        if best is None or worst < best[3]:
            best = (target, history, radiation, worst)

    target, history, radiation, worst = best
    relative = worst / data_norm if data_norm > 0 else 0.0
    if target is None and relative < scattering_threshold:
        classification = Classification.SCATTERING
    elif target is not None and relative < stationary_threshold:
        classification = Classification.CONVERGES_TO_Q
    else:
        classification = Classification.UNDECIDED
    if classification == Classification.UNDECIDED:
        logger.warning("Resolution undecided: best candidate %s with relative residual %.3e", describe_target(target), relative)

    data_energy = energy(traj.snapshots[0], m)
    stationary_energy = 0.0 if target is None else target[1].energy
    radiation_energy = radiation.energy()
    reference = abs(data_energy) or 1.0
    return ResolutionReport(
        chosen_Q=describe_target(target),
        classification=classification,
        residual_history=history,
        radiation_energy=radiation_energy,
        relative_residual=relative,
        data_norm=data_norm,
        estimator_disagreement=radiation.disagreement,
        energy_split={
            'data_energy': data_energy,
            'stationary_energy': stationary_energy,
            'radiation_energy': radiation_energy,
            'relative_gap': abs(data_energy - stationary_energy - radiation_energy) / reference,
        },
        candidates=candidates,
        thresholds={'scattering': scattering_threshold, 'stationary': stationary_threshold},
    )


def sobolev_quotient(samples, dr, m=3):
    """
    J(f) = (int |f'|^2 r^2)^(m+1) / int |f|^(2m+2) r^2 for f on the grid 1 + i*dr with f(1) = 0.
    """
    samples = np.asarray(samples, dtype=float)
    if not np.any(samples):
        raise DegenerateInput("the Sobolev quotient is undefined for the zero function")
    if samples[0] != 0.0:
        raise InvalidRange("f(1) must vanish")
    gradient = quadrature.dirichlet_integral(samples, dr)
    potential = quadrature.potential_integral(samples, dr, m)
    return gradient ** (m + 1) / potential


@dataclass(frozen=True)
class VirialSample:
    t: float
    y: float
    y_prime: float
    y_double_prime: float
    surrogate: float


def cutoff(x):
    """
    1 on [0, 2], 0 on [3, inf), quintic smoothstep in between.
    """
    x = np.clip(np.asarray(x, dtype=float) - 2.0, 0.0, 1.0)
    return 1.0 - (6.0 * x ** 5 - 15.0 * x ** 4 + 10.0 * x ** 3)


def virial_series(traj, time_offset=0.0):
    """
    y(t) = int cutoff(r / (t + t0)) u^2 r^2 dr at every snapshot, its centred time differences,
    and the surrogate 2m int |grad u|^2 + (2m+4) int ut^2 - 4(m+1) E for y''.
    """
    snapshots = [s for s in traj.snapshots if s.time_tag + time_offset > 0]
    if len(snapshots) < 3:
        raise InsufficientData(f"virial series needs at least 3 snapshots, got {len(snapshots)}")
    m = traj.config.m
    times = np.array([s.time_tag for s in snapshots])
    y = np.array([
        quadrature.integrate(cutoff(s.grid / (s.time_tag + time_offset)) * s.u ** 2 * s.grid ** 2, s.dr)
        for s in snapshots
    ])
    y_prime = np.gradient(y, times)
    y_double_prime = np.gradient(y_prime, times)
    samples = []
    for index, snapshot in enumerate(snapshots):
        gradient = quadrature.dirichlet_integral(snapshot.u, snapshot.dr)
        kinetic = quadrature.kinetic_integral(snapshot.ut, snapshot.dr)
        surrogate = 2 * m * gradient + (2 * m + 4) * kinetic - 4 * (m + 1) * energy(snapshot, m)
        samples.append(VirialSample(
            t=float(times[index]),
            y=float(y[index]),
            y_prime=float(y_prime[index]),
            y_double_prime=float(y_double_prime[index]),
            surrogate=float(surrogate),
        ))
    return samples


def energy_bound(traj, late_fraction=LATE_FRACTION):
    """
    (liminf over late snapshots of int |grad u|^2 + ut^2, the bound 4(m+1)/(2m) * E).
    """
    m = traj.config.m
    t_final = traj.times[-1]
    late = [s for s in traj.snapshots if s.time_tag >= late_fraction * t_final]
    if not late:
        raise InsufficientData("no late snapshots")
    liminf = min(
        quadrature.dirichlet_integral(s.u, s.dr) + quadrature.kinetic_integral(s.ut, s.dr) for s in late
    )
    return liminf, 4.0 * (m + 1) / (2.0 * m) * energy(traj.snapshots[0], m)
