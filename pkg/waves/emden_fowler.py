"""
The Emden-Fowler profile h'' = -s^-4 h^(2m+1) with h(s)/s -> 1 at the origin,
and the stationary solutions Q_k(r) = s_k^(-1/m) h(s_k / r) built from it.

Everything is integrated in the s variable only: Q_k at radius r needs h on
(0, s_k], and the series below `SERIES_START` covers the neighbourhood of 0.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.interpolate import BPoly
from scipy.optimize import brentq

from waves import quadrature
from waves.exceptions import (
    DegenerateInput,
    IntegrationDiverged,
    InvalidRange,
    OutOfTable,
    TailTooFat,
    ZerosExhausted,
)

logger = logging.getLogger(__name__)

SERIES_START = 1e-3
DEFAULT_TOL = 1e-10
INITIAL_S_MAX = 8.0
S_CEILING = 1e12  # absolute limit for internal extension while hunting zeros
TAIL_FRACTION = 0.01
TABLE_FACTOR = 1e4  # minimal table end in units of s_k / s_0


def series(s, m, nu=0):
    """
    Two-term expansion of h (nu=0), h' (nu=1) or h'' (nu=2) near the origin.
    """
    if nu == 0:
        return s - s ** (2 * m - 1) / ((2 * m - 1) * (2 * m - 2))
    if nu == 1:
        return 1.0 - s ** (2 * m - 2) / (2 * m - 2)
    return -s ** (2 * m - 3)


def _right_hand_side(m):
    power = 2 * m + 1

    def rhs(s, state):
        return [state[1], -state[0] ** power / s ** 4]

    return rhs


def _integrate_segment(m, s_start, s_end, state, tol):
    solution = solve_ivp(
        _right_hand_side(m),
        (s_start, s_end),
        state,
        method='RK45',
        rtol=tol,
        atol=tol * 1e-4,
    )
    if solution.status < 0 or not np.all(np.isfinite(solution.y)):
        raise IntegrationDiverged(f"Emden-Fowler integration diverged near s={solution.t[-1]:.6g}")
    return np.column_stack([solution.t, solution.y[0], solution.y[1]])


@dataclass(frozen=True, eq=False)
class HProfile:
    """
    Dense-output solution of the Emden-Fowler equation on [0, s_max].

    `nodes` holds the accepted integrator states (s, h, h') on [series_start, s_max].
    Between nodes the profile is the quintic Hermite interpolant matching h, h'
    and h'' (the latter taken from the equation), below series_start the series.
    """
    m: int
    s_max: float
    nodes: np.ndarray
    tol: float = DEFAULT_TOL
    series_start: float = SERIES_START

    @cached_property
    def _interpolant(self):
        s, h, hp = self.nodes.T
        hpp = -h ** (2 * self.m + 1) / s ** 4
        return BPoly.from_derivatives(s, np.column_stack([h, hp, hpp]))

    def value(self, s, nu=0):
        """
        Evaluate h (nu=0), h' (nu=1) or h'' (nu=2) at s in [0, s_max].
        """
        s_array = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s_array < 0) or np.any(s_array > self.s_max * (1 + 1e-12)):
            raise OutOfTable(f"s outside the tabulated window [0, {self.s_max:.6g}]")
        result = np.empty_like(s_array)
        near = s_array < self.series_start
        if np.any(near):
            result[near] = series(s_array[near], self.m, nu)
        if np.any(~near):
            result[~near] = self._interpolant(np.minimum(s_array[~near], self.s_max), nu)
        if np.ndim(s) == 0:
            return float(result[0])
        return result.reshape(np.shape(s))

    def residual(self, s):
        """
        h'' + s^-4 h^(2m+1) evaluated on the dense output.
        """
        s = np.asarray(s, dtype=float)
        return self.value(s, 2) + self.value(s) ** (2 * self.m + 1) / s ** 4


def integrate_h(m=3, s_max=INITIAL_S_MAX, tol=DEFAULT_TOL):
    """
    Integrate the Emden-Fowler equation from the series start up to s_max.
    """
    if m < 3:
        raise InvalidRange(f"m must be at least 3, got {m}")
    if not 0 < tol < 1e-6:
        raise InvalidRange(f"tolerance must lie in (0, 1e-6), got {tol}")
    if s_max <= SERIES_START:
        raise InvalidRange(f"s_max={s_max} does not exceed the series start {SERIES_START}")
    state = [series(SERIES_START, m), series(SERIES_START, m, nu=1)]
    nodes = _integrate_segment(m, SERIES_START, s_max, state, tol)
    logger.debug("Integrated h for m=%s up to s=%.6g with %s nodes", m, s_max, len(nodes))
    return HProfile(m=m, s_max=float(s_max), nodes=nodes, tol=tol)


def extend(profile, s_max):
    """
    Continue the integration of `profile` up to a larger s_max.
    """
    if s_max <= profile.s_max:
        return profile
    last = profile.nodes[-1]
    continuation = _integrate_segment(profile.m, last[0], s_max, [last[1], last[2]], profile.tol)
    nodes = np.vstack([profile.nodes, continuation[1:]])
    return HProfile(m=profile.m, s_max=float(s_max), nodes=nodes, tol=profile.tol)


def _sign_change_roots(profile, nu):
    column = profile.nodes[:, 1 + nu]
    s = profile.nodes[:, 0]
    brackets = np.nonzero(np.sign(column[:-1]) * np.sign(column[1:]) < 0)[0]
    roots = [
        brentq(lambda x: profile.value(x, nu), s[i], s[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        for i in brackets
    ]
    # a node landing exactly on a root has no strict sign change on either side
    exact = np.nonzero(column[1:] == 0.0)[0] + 1
    roots.extend(float(s[i]) for i in exact)
    return sorted(roots)


def _locate(profile, count, nu, s_ceiling=S_CEILING):
    """
    Extend `profile` until it holds `count` sign changes of h (nu=0) or h' (nu=1).
    """
    current = profile
    while True:
        roots = _sign_change_roots(current, nu)
        if len(roots) >= count:
            return current, roots[:count]
        if current.s_max >= s_ceiling:
            raise ZerosExhausted(f"only {len(roots)} of {count} roots found below s={s_ceiling:.3g}")
        current = extend(current, min(4.0 * current.s_max, s_ceiling))


def find_zeros(profile, count, s_ceiling=S_CEILING):
    """
    First `count` zeros 0 < s_0 < s_1 < ... of h, refined by bracketing on the dense output.
    """
    if count < 1:
        raise InvalidRange("count must be positive")
    return _locate(profile, count, nu=0, s_ceiling=s_ceiling)[1]


def find_extrema(profile, count, s_ceiling=S_CEILING):
    """
    First `count` zeros of h', i.e. the extremum abscissae X_0 < X_1 < ... of h.
    """
    if count < 1:
        raise InvalidRange("count must be positive")
    return _locate(profile, count, nu=1, s_ceiling=s_ceiling)[1]


@lru_cache(maxsize=None)
def _master_profile(m, tol=DEFAULT_TOL):
    return integrate_h(m, INITIAL_S_MAX, tol)


@lru_cache(maxsize=None)
def _profile_with_zeros(m, count, tol=DEFAULT_TOL):
    profile, zeros = _locate(_master_profile(m, tol), count, nu=0)
    return profile, tuple(zeros)


@dataclass(frozen=True)
class FowlerFit:
    """
    Large-s behaviour of h: zero spacing exponent and amplitude law.
    """
    spacing_slope: float
    expected_slope: float
    amplitude_spread: float
    fitted_A: float


def fowler_fit(m=3, first=5, last=15, amplitude_first=10, amplitude_last=20, tol=DEFAULT_TOL):
    """
    Regress log(s_{j+1} - s_j) on log X_j over zeros first..last and measure the spread of
    |h(X_n)| / X_n^(4/(2m+4)) over extrema amplitude_first..amplitude_last.
    """
    profile, zeros = _profile_with_zeros(m, last + 2, tol)
    profile, extrema = _locate(profile, max(amplitude_last + 1, last + 2), nu=1)
    zeros = np.asarray(zeros)
    extrema = np.asarray(extrema)

    # the extremum between s_j and s_j+1
    between = extrema[np.searchsorted(extrema, zeros[first:last + 1])]
    gaps = zeros[first + 1:last + 2] - zeros[first:last + 1]
    slope = np.polyfit(np.log(between), np.log(gaps), 1)[0]

    peaks = extrema[amplitude_first:amplitude_last + 1]
    amplitudes = np.abs(profile.value(peaks)) / peaks ** (4.0 / (2 * m + 4))
    spread = float((amplitudes.max() - amplitudes.min()) / amplitudes.mean())
    return FowlerFit(
        spacing_slope=float(slope),
        expected_slope=8.0 / (2 * m + 4),
        amplitude_spread=spread,
        fitted_A=float(amplitudes.mean()),
    )


@dataclass(frozen=True, eq=False)
class StationaryProfile:
    """
    Stationary solution Q_k with exactly k sign changes on (1, infinity), tabulated on a
    geometric grid of [1, r_tab_max]. Values off the table are evaluated through h.
    """
    k: int
    m: int
    s_k: float
    grid: np.ndarray
    samples: np.ndarray
    slopes: np.ndarray
    c_k: float
    zeros_r: tuple
    profile: HProfile

    @property
    def r_tab_max(self):
        return float(self.grid[-1])

    @property
    def scale(self):
        return self.s_k ** (-1.0 / self.m)

    def value(self, r):
        """
        Q_k(r) for r >= 1; exactly zero at r = 1.
        """
        r = np.asarray(r, dtype=float)
        if np.any(r < 1.0):
            raise OutOfTable("stationary profiles live on r >= 1")
        values = self.scale * np.asarray(self.profile.value(self.s_k / r))
        values = np.where(r == 1.0, 0.0, values)
        return float(values) if values.ndim == 0 else values

    def derivative(self, r):
        """
        Q_k'(r) for r >= 1.
        """
        r = np.asarray(r, dtype=float)
        if np.any(r < 1.0):
            raise OutOfTable("stationary profiles live on r >= 1")
        values = -self.scale * self.s_k * np.asarray(self.profile.value(self.s_k / r, 1)) / r ** 2
        return float(values) if values.ndim == 0 else values

    @cached_property
    def energy(self):
        return energy_of_Q(self)[0]


def build_Q(m=3, k=0, r_tab_max=1e3, points=20001, tol=DEFAULT_TOL):
    """
    Sample Q_k(r) = s_k^(-1/m) h(s_k / r) on [1, R] and fit its asymptotic constant.

    R is the larger of r_tab_max and TABLE_FACTOR * s_k / s_0: the outermost zero of Q_k sits
    at s_k / s_0, and beyond R the profile is in the series regime of h, so the fitted c_k and
    the closed-form tails are exact to rounding for every k.
    """
    if k < 0:
        raise InvalidRange("k must be non-negative")
    if r_tab_max <= 10:
        raise InvalidRange(f"r_tab_max must exceed 10, got {r_tab_max}")
    profile, zeros = _profile_with_zeros(m, k + 1, tol)
    s_k = zeros[k]
    scale = s_k ** (-1.0 / m)

    table_end = max(float(r_tab_max), TABLE_FACTOR * s_k / zeros[0])
    r = np.geomspace(1.0, table_end, points)
    samples = scale * profile.value(s_k / r)
    samples[0] = 0.0
    slopes = -scale * s_k * profile.value(s_k / r, 1) / r ** 2

    changes = int(np.count_nonzero(np.sign(samples[1:-1]) * np.sign(samples[2:]) < 0))
    if changes != k:
        raise InvalidRange(f"Q_{k} shows {changes} sign changes on the table; refine the grid")

    # r Q_k(r) = c_k + a r^-(2m-2) + ... on the tail
    tail = r >= table_end / 2
    c_k = float(np.polyfit(r[tail] ** (-(2 * m - 2)), r[tail] * samples[tail], 1)[1])

    logger.info("Built Q_%s (m=%s): s_k=%.12g c_k=%.12g", k, m, s_k, c_k)
    return StationaryProfile(
        k=k,
        m=m,
        s_k=float(s_k),
        grid=r,
        samples=samples,
        slopes=slopes,
        c_k=c_k,
        zeros_r=tuple(float(s_k / s_j) for s_j in zeros[:k]),
        profile=profile,
    )


def dirichlet_and_potential(q):
    """
    (integral of |Q'|^2 r^2, integral of |Q|^(2m+2) r^2) over (1, infinity), closed-form tails included.
    """
    m = q.m
    r = q.grid
    gradient = float(simpson((q.slopes * r) ** 2, x=r))
    potential = float(simpson(np.abs(q.samples) ** (2 * m + 2) * r ** 2, x=r))
    gradient_tail = quadrature.gradient_tail(q.c_k, r[-1])
    potential_tail = quadrature.potential_tail(q.c_k, r[-1], m)
    if gradient_tail > TAIL_FRACTION * gradient or potential_tail > TAIL_FRACTION * potential:
        raise TailTooFat(f"tail beyond r={r[-1]:.6g} exceeds 1% of the integral; raise r_tab_max")
    return gradient + gradient_tail, potential + potential_tail


def energy_of_Q(q):
    """
    E(Q_k, 0) twice: directly in r, and through the scaled s-integral of h^(2m+2) s^-4.
    """
    m = q.m
    gradient, potential = dirichlet_and_potential(q)
    direct = 0.5 * gradient - potential / (2 * m + 2)

    s0 = q.profile.series_start
    s_nodes = q.profile.nodes[:, 0]
    knots = np.concatenate([[s0], s_nodes[(s_nodes > s0) & (s_nodes < q.s_k)], [q.s_k]])
    fine = np.append((knots[:-1, None] + np.outer(np.diff(knots), np.arange(4) / 4.0)).ravel(), q.s_k)
    inner = float(simpson(q.profile.value(fine) ** (2 * m + 2) / fine ** 4, x=fine))
    head = s0 ** (2 * m - 1) / (2 * m - 1)
    scaled = m / (2.0 * (m + 1)) * q.s_k ** ((m - 2.0) / m) * (head + inner)
    return direct, scaled


def pohozaev_gap(q):
    """
    Relative gap between the Dirichlet integral and the potential integral of Q_k.
    """
    gradient, potential = dirichlet_and_potential(q)
    return abs(gradient - potential) / potential


def sample_Z(ell, r, profile=None, m=3, derivative=False):
    """
    Z_ell(r) = sign(ell) alpha^(1/m) Z_1(alpha r), alpha = |ell|^(m/(1-m)), Z_1(rho) = h(1/rho).
    With derivative=True returns dZ_ell/dr instead.
    """
    if ell == 0:
        raise DegenerateInput("ell must be nonzero")
    profile = profile or _master_profile(m)
    m = profile.m
    alpha = abs(ell) ** (m / (1.0 - m))
    rho = alpha * np.asarray(r, dtype=float)
    if np.any(rho <= 0) or np.any(1.0 / rho > profile.s_max):
        raise OutOfTable(f"alpha*r must be at least {1.0 / profile.s_max:.6g}")
    sign = np.sign(ell)
    if derivative:
        return sign * alpha ** (1.0 / m) * alpha * (-profile.value(1.0 / rho, 1) / rho ** 2)
    return sign * alpha ** (1.0 / m) * profile.value(1.0 / rho)


@lru_cache(maxsize=None)
def _cached_Q(m, k, r_tab_max):
    return build_Q(m, k, r_tab_max)


def stationary_family(m=3, k_max=4, r_tab_max=1e3):
    """
    Q_0 ... Q_k_max; each member is built once per (m, k, r_tab_max). r_tab_max is a lower
    bound on the table end, see build_Q.
    """
    return tuple(_cached_Q(m, k, float(r_tab_max)) for k in range(k_max + 1))
