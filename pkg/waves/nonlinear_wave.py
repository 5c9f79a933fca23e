"""
Focusing equation u_tt - u_rr - (2/r) u_r = |u|^(2m) u outside the unit ball.

The solver advances w = r u, which satisfies w_tt = w_rr + r^(-2m) |w|^(2m) w,
with the explicit leapfrog at dt = dr. At that ratio the discrete linear part
is exact transport along characteristics, so all scheme error comes from the
source term.
"""
import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from waves import quadrature
from waves.exceptions import InvalidField, InvalidRange, NotApplicable
from waves.linear_wave import RadialField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionConfig:
    """
    Parameters of one nonlinear run. `domain_end` of None means the grid of the data.
    """
    m: int = 3
    dr: float = 1e-3
    t_final: float = 10.0
    domain_end: float = None
    snapshot_stride: int = 100
    blowup_threshold: float = 1e6
    energy_tolerance: float = 1e-4

    def __post_init__(self):
        if self.m < 3:
            raise InvalidRange(f"m must be at least 3, got {self.m}")
        if not self.dr > 0 or not self.t_final >= 0 or self.snapshot_stride < 1:
            raise InvalidRange("dr must be positive, t_final non-negative and snapshot_stride at least 1")

    @property
    def dt(self):
        return self.dr

    @property
    def steps(self):
        return int(round(self.t_final / self.dt))

    def minimal_domain_end(self, support_radius):
        """
        Smallest domain end that keeps the right boundary causally disconnected from the data.
        """
        return support_radius + self.t_final + 2.0 * self.dr


class EventKind(str, enum.Enum):
    COMPLETED = 'completed'
    BLOW_UP = 'blow_up'
    NUMERICAL_FAILURE = 'numerical_failure'


@dataclass(frozen=True)
class Event:
    kind: EventKind
    time: float


@dataclass
class Trajectory:
    """
    Time-ordered snapshots of a nonlinear run, the energy at every snapshot and the terminal event.
    """
    config: EvolutionConfig
    snapshots: list = field(default_factory=list)
    energy_log: list = field(default_factory=list)
    event: Event = None

    @property
    def times(self):
        return [snapshot.time_tag for snapshot in self.snapshots]

    @property
    def blew_up(self):
        return self.event is not None and self.event.kind != EventKind.COMPLETED

    def max_energy_drift(self):
        """
        max |E(t) - E(0)| / |E(0)| over the log (absolute drift when E(0) = 0).
        """
        if not self.energy_log:
            return 0.0
        energies = np.array([energy for _, energy in self.energy_log])
        reference = abs(energies[0]) or 1.0
        return float(np.max(np.abs(energies - energies[0])) / reference)

    def snapshot_at(self, t):
        """
        Snapshot whose time is closest to t; it must lie within half a time step.
        """
        if not self.snapshots:
            raise NotApplicable("trajectory has no snapshots")
        times = np.array(self.times)
        index = int(np.argmin(np.abs(times - t)))
        if abs(times[index] - t) > 0.5 * self.config.dt + 1e-12:
            raise InvalidRange(f"no snapshot at t={t}; nearest is t={times[index]}")
        return self.snapshots[index]


def field_energy(u, ut, dr, m):
    """
    E = 1/2 int u_r^2 + 1/2 int ut^2 - 1/(2m+2) int |u|^(2m+2), measure r^2 dr, harmonic tails included.
    """
    return (
        0.5 * quadrature.dirichlet_integral(u, dr)
        + 0.5 * quadrature.kinetic_integral(ut, dr)
        - quadrature.potential_integral(u, dr, m) / (2 * m + 2)
    )


def _exceeds(u, threshold):
    return bool(np.max(np.abs(u)) > threshold)


def _blowup_kind(u, ut, threshold):
    """
    NUMERICAL_FAILURE for non-finite samples, BLOW_UP when max |u| exceeds the threshold, else None.
    `ut` may be None when the velocity of the level is not known yet.
    """
    if not np.all(np.isfinite(u)) or (ut is not None and not np.all(np.isfinite(ut))):
        return EventKind.NUMERICAL_FAILURE
    if _exceeds(u, threshold):
        return EventKind.BLOW_UP
    return None


def detect_blowup(state, cfg):
    """
    True when max |u| exceeds the configured threshold or any sample is not finite.
    """
    return _blowup_kind(state.u, state.ut, cfg.blowup_threshold) is not None


def _domain(data, cfg):
    """
    w = r u and v = r ut on the evolution grid; the data grid is extended to cfg.domain_end
    by holding w (harmonic continuation u = c/r) with v = 0.
    """
    if abs(data.dr - cfg.dr) > 1e-15 * cfg.dr:
        raise InvalidRange(f"data grid step {data.dr} differs from the configured dr {cfg.dr}")
    w = data.grid * data.u
    v = data.grid * data.ut
    if cfg.domain_end is not None and cfg.domain_end > data.r_end + 0.5 * cfg.dr:
        if v[-1] != 0.0:
            raise InvalidField("cannot extend data whose velocity does not vanish at the grid end")
        extra = int(round((cfg.domain_end - data.r_end) / cfg.dr))
        w = np.concatenate([w, np.full(extra, w[-1])])
        v = np.concatenate([v, np.zeros(extra)])
    return w, v


def evolve_nonlinear(data, cfg, linear=False):
    """
    Leapfrog on w = r u with dt = dr, w(t, 1) = 0 and the right boundary held at its initial value.
    With linear=True the source is switched off, giving a like-for-like linear reference.
    """
    dt = cfg.dt
    m = cfg.m
    w, v = _domain(data, cfg)
    size = len(w)
    r = quadrature.grid(cfg.dr, size)
    power = 2 * m
    coupling = (0.0 if linear else 1.0) / r ** power

    def source(level):
        return np.abs(level) ** power * level * coupling

    trajectory = Trajectory(config=cfg)

    def record(step, level, ut):
        t = data.time_tag + step * dt
        u = level / r
        u[0] = 0.0
        snapshot = RadialField(dr=cfg.dr, u=u, ut=ut, time_tag=t)
        trajectory.snapshots.append(snapshot)
        trajectory.energy_log.append((t, field_energy(snapshot.u, snapshot.ut, cfg.dr, m)))

    steps = cfg.steps
    logger.info("Evolving on %s nodes for %s steps (m=%s, linear=%s)", size, steps, m, linear)

    with np.errstate(over='ignore', invalid='ignore'):
        record(0, w.copy(), v / r)
        if steps == 0:
            trajectory.event = Event(EventKind.COMPLETED, data.time_tag)
            return trajectory

        # first step from the d'Alembert formula over one cell, source at second order
        previous = w.copy()
        current = np.empty_like(w)
        current[1:-1] = (
            0.5 * (w[2:] + w[:-2])
            + 0.25 * dt * (v[:-2] + 2.0 * v[1:-1] + v[2:])
            + 0.5 * dt * dt * source(w)[1:-1]
        )
        current[0] = 0.0
        current[-1] = w[-1]

        step = 1
        while True:
            kind = _blowup_kind(current / r, None, cfg.blowup_threshold)
            if kind is not None:
                trajectory.event = Event(kind, data.time_tag + step * dt)
                break
            following = np.empty_like(current)
            following[1:-1] = current[2:] + current[:-2] - previous[1:-1] + dt * dt * source(current)[1:-1]
            following[0] = 0.0
            following[-1] = w[-1]
            if step == steps and not np.all(np.isfinite(following)):
                # the last level has no finite velocity to record
                trajectory.event = Event(EventKind.NUMERICAL_FAILURE, data.time_tag + step * dt)
                break
            if step % cfg.snapshot_stride == 0 or step == steps:
                if np.all(np.isfinite(following)):
                    record(step, current.copy(), (following - previous) / (2.0 * dt * r))
            if step == steps:
                trajectory.event = Event(EventKind.COMPLETED, data.time_tag + step * dt)
                break
            previous, current = current, following
            step += 1

    drift = trajectory.max_energy_drift()
    if trajectory.event.kind == EventKind.COMPLETED and drift > cfg.energy_tolerance:
        logger.warning("Energy drift %.3e exceeds the configured tolerance %.1e", drift, cfg.energy_tolerance)
    logger.info("Run finished: %s at t=%.6g", trajectory.event.kind.value, trajectory.event.time)
    return trajectory


def small_data_deviation(data, eps, t_final, cfg=None):
    """
    sup over snapshots of ||u(t) - u_L(t)|| for data scaled by eps, where u_L is the
    same scheme with the source switched off.
    """
    cfg = replace(cfg, t_final=t_final) if cfg else EvolutionConfig(dr=data.dr, t_final=t_final)
    if eps == 0:
        return 0.0
    scaled = data.scaled(eps)
    nonlinear = evolve_nonlinear(scaled, cfg)
    if nonlinear.event.kind != EventKind.COMPLETED:
        raise NotApplicable(f"eps={eps} is not in the small-data regime: run ended with {nonlinear.event.kind.value}")
    linear = evolve_nonlinear(scaled, cfg, linear=True)
    deviation = 0.0
    for a, b in zip(nonlinear.snapshots, linear.snapshots):
        difference = a - b
        deviation = max(
            deviation,
            np.sqrt(quadrature.dirichlet_integral(difference.u, cfg.dr) + quadrature.kinetic_integral(difference.ut, cfg.dr)),
        )
    return float(deviation)
