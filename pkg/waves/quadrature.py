"""
Radial integrals shared by every module.

All integrals use the radial measure r^2 dr on [1, R] (no angular factor).
Fields that do not vanish at the end of their grid are continued by the
harmonic tail c/r with c = R u(R), whose contributions are closed-form.
"""
import numpy as np
from scipy.integrate import simpson


def grid(dr, size):
    """
    Uniform radial grid r_i = 1 + i*dr for i = 0..size-1.
    """
    return 1.0 + dr * np.arange(size)


def integrate(values, dr):
    """
    Composite Simpson rule over uniformly spaced samples.
    """
    if len(values) < 2:
        return 0.0
    return float(simpson(values, dx=dr))


def radial_derivative(values, dr):
    """
    Fourth-order centred differences in the interior, second-order one-sided at the two ends.
    """
    derivative = np.gradient(values, dr, edge_order=2) if len(values) > 2 else np.gradient(values, dr)
    if len(values) >= 5:
        derivative[2:-2] = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * dr)
    return derivative


def harmonic_constant(values, r_end):
    """
    Constant c of the harmonic continuation c/r beyond the end of the grid.
    """
    return float(values[-1]) * r_end


def gradient_tail(c, r_end):
    """
    Integral of |d/dr (c/r)|^2 r^2 over [r_end, infinity).
    """
    return c * c / r_end


def potential_tail(c, r_end, m):
    """
    Integral of |c/r|^(2m+2) r^2 over [r_end, infinity).
    """
    return abs(c) ** (2 * m + 2) / ((2 * m - 1) * r_end ** (2 * m - 1))


def dirichlet_integral(u, dr, start=0):
    """
    Integral of u_r^2 r^2 from r_start to infinity, harmonic tail included.
    """
    r = grid(dr, len(u))
    ur = radial_derivative(u, dr)
    c = harmonic_constant(u, r[-1])
    return integrate((ur * r)[start:] ** 2, dr) + gradient_tail(c, r[-1])


def kinetic_integral(ut, dr, start=0):
    """
    Integral of ut^2 r^2 from r_start to the end of the grid.
    """
    r = grid(dr, len(ut))
    return integrate((ut * r)[start:] ** 2, dr)


def potential_integral(u, dr, m, start=0):
    """
    Integral of |u|^(2m+2) r^2 from r_start to infinity, harmonic tail included.
    """
    r = grid(dr, len(u))
    c = harmonic_constant(u, r[-1])
    return integrate(np.abs(u[start:]) ** (2 * m + 2) * r[start:] ** 2, dr) + potential_tail(c, r[-1], m)


def index_at(radius, dr, size):
    """
    First grid index whose radius is not below `radius`, clipped to the grid.
    """
    index = int(np.ceil((radius - 1.0) / dr - 1e-9))
    return min(max(index, 0), size - 1)
