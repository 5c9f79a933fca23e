"""
Exact radial linear propagator outside the unit ball.

For radial data with Dirichlet condition at r = 1 the linear solution is
r u(t, r) = psi(t + r) - psi(t + 2 - r), with psi computed from the data.
The radiation profiles are G_-(sigma) = psi'(sigma) and G_+(sigma) = psi'(2 - sigma).
"""
import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline

from waves import quadrature
from waves.exceptions import InvalidField, InvalidRange, OutOfWindow

logger = logging.getLogger(__name__)

SETTLED_TOL = 1e-10  # |psi'| at a table end, relative to max |psi'|, below which psi is continued as a constant


@dataclass(frozen=True, eq=False)
class RadialField:
    """
    Sampled pair (u, ut) on the uniform grid r_i = 1 + i*dr, i = 0..N.
    """
    dr: float
    u: np.ndarray
    ut: np.ndarray
    time_tag: float = 0.0

    def __post_init__(self):
        if not self.dr > 0:
            raise InvalidField(f"grid step must be positive, got {self.dr}")
        if len(self.u) != len(self.ut) or len(self.u) < 2:
            raise InvalidField("u and ut must share a grid of at least two nodes")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.ut))):
            raise InvalidField("field samples must be finite")
        if self.u[0] != 0.0:
            raise InvalidField(f"Dirichlet condition violated: u(1) = {self.u[0]!r}")

    @property
    def n(self):
        """Index N of the last node."""
        return len(self.u) - 1

    @cached_property
    def grid(self):
        return quadrature.grid(self.dr, len(self.u))

    @property
    def r_end(self):
        return float(self.grid[-1])

    def scaled(self, factor):
        """Field multiplied by a constant."""
        return replace(self, u=factor * self.u, ut=factor * self.ut)

    def time_reversed(self):
        """(u, ut) -> (u, -ut)."""
        return replace(self, ut=-self.ut)

    def __add__(self, other):
        if other.dr != self.dr or len(other.u) != len(self.u):
            raise InvalidField("fields must share a grid")
        return replace(self, u=self.u + other.u, ut=self.ut + other.ut)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def __neg__(self):
        return self.scaled(-1.0)


def zero_field(dr, size, time_tag=0.0):
    return RadialField(dr=dr, u=np.zeros(size), ut=np.zeros(size), time_tag=time_tag)


def field_norm(field):
    """
    Energy-space norm ||(u, ut)||, i.e. the square root of the integral of (u_r^2 + ut^2) r^2.
    """
    return float(np.sqrt(quadrature.dirichlet_integral(field.u, field.dr) + quadrature.kinetic_integral(field.ut, field.dr)))


@dataclass(frozen=True, eq=False)
class PsiFunction:
    """
    psi and psi' tabulated on sigma_j = 1 + j*dr, j = -N..N, i.e. on [2 - R, R].
    Evaluation inside the table uses the cubic Hermite spline through (psi, psi').
    Outside the table psi is continued as a constant when the end is settled.
    """
    dr: float
    psi: np.ndarray
    psi_prime: np.ndarray

    @property
    def n(self):
        return (len(self.psi) - 1) // 2

    @cached_property
    def sigma_grid(self):
        return 1.0 + self.dr * np.arange(-self.n, self.n + 1)

    @property
    def sigma_min(self):
        return float(self.sigma_grid[0])

    @property
    def sigma_max(self):
        return float(self.sigma_grid[-1])

    @cached_property
    def _spline(self):
        return CubicHermiteSpline(self.sigma_grid, self.psi, self.psi_prime)

    @cached_property
    def _settled(self):
        peak = np.max(np.abs(self.psi_prime))
        if peak == 0.0:
            return True, True
        return (abs(self.psi_prime[0]) <= SETTLED_TOL * peak, abs(self.psi_prime[-1]) <= SETTLED_TOL * peak)

    def _evaluate(self, sigma, nu):
        sigma = np.asarray(sigma, dtype=float)
        below = sigma < self.sigma_min
        above = sigma > self.sigma_max
        settled_left, settled_right = self._settled
        if (np.any(below) and not settled_left) or (np.any(above) and not settled_right):
            raise OutOfWindow(
                f"sigma outside [{self.sigma_min:.6g}, {self.sigma_max:.6g}] where psi is not constant"
            )
        values = self._spline(np.clip(sigma, self.sigma_min, self.sigma_max), nu)
        if nu == 0:
            values = np.where(below, self.psi[0], np.where(above, self.psi[-1], values))
        else:
            values = np.where(below | above, 0.0, values)
        return values

    def value(self, sigma):
        return self._evaluate(sigma, 0)

    def derivative(self, sigma):
        return self._evaluate(sigma, 1)

    def exterior_form(self, radius):
        """
        2 * integral of psi'^2 over [radius, inf) plus over (-inf, 2 - radius].
        """
        right = self.sigma_grid >= radius - 1e-12
        left = self.sigma_grid <= 2.0 - radius + 1e-12
        squared = self.psi_prime ** 2
        return 2.0 * quadrature.integrate(squared[right], self.dr) + 2.0 * quadrature.integrate(squared[left], self.dr)


def psi_from_data(data):
    """
    psi(sigma) = 1/2 [int_1^sigma rho u1 + sigma u0(sigma)]            for sigma >= 1,
    psi(sigma) = 1/2 [int_1^(2-sigma) rho u1 - (2-sigma) u0(2-sigma)]  for sigma < 1,
    with psi' from the differentiated branches and a centred difference at sigma = 1.
    """
    r = data.grid
    dr = data.dr
    momentum = cumulative_simpson(r * data.ut, dx=dr, initial=0.0)
    du0 = quadrature.radial_derivative(data.u, dr)

    right = 0.5 * (momentum + r * data.u)
    left = 0.5 * (momentum - r * data.u)
    right_prime = 0.5 * (r * data.ut + data.u + r * du0)
    left_prime = 0.5 * (-r * data.ut + data.u + r * du0)

    psi = np.concatenate([left[:0:-1], right])
    psi_prime = np.concatenate([left_prime[:0:-1], right_prime])
    n = data.n
    psi_prime[n] = (psi[n + 1] - psi[n - 1]) / (2.0 * dr)
    return PsiFunction(dr=dr, psi=psi, psi_prime=psi_prime)


def evolve_linear(data, t, r_max=None, psi=None):
    """
    Linear solution at time t on the grid of `data`, extended up to r_max
    (default: the data radius plus |t|, where strong Huygens keeps the support).
    """
    psi = psi or psi_from_data(data)
    if r_max is None:
        r_max = data.r_end + abs(t)
    size = int(round((r_max - 1.0) / data.dr)) + 1
    offset = data.dr * np.arange(size)
    r = 1.0 + offset
    # same base t + 1 for both arguments keeps u(t, 1) = 0 exactly
    base = t + 1.0
    forward = base + offset
    reflected = base - offset
    u = (psi.value(forward) - psi.value(reflected)) / r
    ut = (psi.derivative(forward) - psi.derivative(reflected)) / r
    return RadialField(dr=data.dr, u=u, ut=ut, time_tag=data.time_tag + t)


def exterior_energy(data, radius):
    """
    Integral over [radius, inf) of (d/dr (r u0))^2 + r^2 u1^2.
    """
    if radius < 1.0:
        raise InvalidRange(f"radius must be at least 1, got {radius}")
    r = data.grid
    start = quadrature.index_at(radius, data.dr, len(r))
    density = quadrature.radial_derivative(r * data.u, data.dr) ** 2 + (r * data.ut) ** 2
    total = quadrature.integrate(density[start:], data.dr)
    gap = r[start] - radius
    if start > 0 and gap > 1e-12:
        # linear piece between radius and the first node above it
        weight = gap / data.dr
        inside = density[start] * (1.0 - weight) + density[start - 1] * weight
        total += 0.5 * gap * (inside + density[start])
    return total


def channel_energy(data, radius, t, psi=None):
    """
    Integral over r >= radius + |t| of (d/dr (r u))^2 + (d/dt (r u))^2 at time t,
    evaluated through psi': the integrand is 2 psi'(t + r)^2 + 2 psi'(t + 2 - r)^2.
    """
    psi = psi or psi_from_data(data)
    start = radius + abs(t)
    end = max(psi.sigma_max - t, 2.0 - psi.sigma_min + t, start)
    size = max(int(np.ceil((end - start) / data.dr)), 2) + 1
    r = np.linspace(start, end, size)
    density = 2.0 * psi.derivative(t + r) ** 2 + 2.0 * psi.derivative(t + 2.0 - r) ** 2
    return quadrature.integrate(density, r[1] - r[0])


@dataclass(frozen=True, eq=False)
class RadiationProfile:
    """
    Radiation field G on the uniform grid eta_j = eta0 + j*d_eta, zero outside.
    `disagreement` reports the relative gap between estimators when the profile was extracted.
    """
    eta0: float
    d_eta: float
    G: np.ndarray
    sign_tag: str = '+'
    disagreement: float = 0.0

    @cached_property
    def eta_grid(self):
        return self.eta0 + self.d_eta * np.arange(len(self.G))

    @property
    def eta_max(self):
        return float(self.eta_grid[-1])

    def value(self, eta):
        return np.interp(eta, self.eta_grid, self.G, left=0.0, right=0.0)

    def energy(self):
        """Discrete L2 norm squared, the integral of G^2."""
        return quadrature.integrate(self.G ** 2, self.d_eta)

    def shifted(self, t):
        """Profile of the linear flow after time t: eta -> eta - t."""
        return replace(self, eta0=self.eta0 + t)


def radiation_fields(data, psi=None):
    """
    (G_+, G_-) of the data on eta in [2 - R, R].
    """
    psi = psi or psi_from_data(data)
    plus = RadiationProfile(eta0=psi.sigma_min, d_eta=psi.dr, G=psi.psi_prime[::-1].copy(), sign_tag='+')
    minus = RadiationProfile(eta0=psi.sigma_min, d_eta=psi.dr, G=psi.psi_prime.copy(), sign_tag='-')
    return plus, minus


def data_from_radiation(g, r_max=None, time_tag=0.0):
    """
    Data whose G_+ is g:
    u0(r) = (1/r) int_1^r (G(tau) + G(2 - tau)) dtau,  u1(r) = (G(2 - r) - G(r)) / r.
    """
    if g.sign_tag != '+':
        raise InvalidRange("data are rebuilt from the outgoing profile G_+")
    if r_max is None:
        r_max = max(g.eta_max, 2.0 - g.eta0)
    size = int(round((r_max - 1.0) / g.d_eta)) + 1
    offset = g.d_eta * np.arange(size)
    r = 1.0 + offset
    outgoing = g.value(1.0 + offset)
    incoming = g.value(1.0 - offset)
    u0 = cumulative_simpson(outgoing + incoming, dx=g.d_eta, initial=0.0) / r
    u1 = (incoming - outgoing) / r
    u0[0] = 0.0
    return RadialField(dr=g.d_eta, u=u0, ut=u1, time_tag=time_tag)
