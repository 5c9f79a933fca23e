"""
Initial-data recipes shared by configuration parsing, commands and experiments.

A recipe is a plain dict with a `kind` key:
    gaussian           {amplitude, center, width, velocity}
    stationary_k       {k, sign, perturbation: gaussian recipe or None}
    radiation_rebuilt  {amplitude, center, width}
"""
import logging

import numpy as np

from waves import quadrature
from waves.emden_fowler import stationary_family
from waves.exceptions import ConfigError
from waves.linear_wave import RadialField, RadiationProfile, data_from_radiation

logger = logging.getLogger(__name__)

GAUSSIAN = 'gaussian'
STATIONARY_K = 'stationary_k'
RADIATION_REBUILT = 'radiation_rebuilt'
DATA_KINDS = (GAUSSIAN, RADIATION_REBUILT, STATIONARY_K)

TRUNCATION = 1e-14  # samples below this fraction of the maximum are set to zero
GAUSSIAN_REACH = float(np.sqrt(2.0 * np.log(1.0 / TRUNCATION)))  # support half-width in units of the width
RADIATION_REACH = 9.0


def gaussian_profile(r, center=3.0, width=1.0):
    """
    (1 - 1/r) exp(-(r - center)^2 / (2 width^2)), zeroed below the truncation level.
    """
    profile = (1.0 - 1.0 / r) * np.exp(-((r - center) ** 2) / (2.0 * width ** 2))
    peak = np.max(np.abs(profile))
    if peak > 0:
        profile[np.abs(profile) < TRUNCATION * peak] = 0.0
    profile[0] = 0.0
    return profile


def gaussian(dr, r_end, amplitude=1.0, center=3.0, width=1.0, velocity=0.0):
    """
    Gaussian bump in u0 with amplitude `amplitude` and the same shape in u1 scaled by `velocity`.
    """
    r = quadrature.grid(dr, int(round((r_end - 1.0) / dr)) + 1)
    profile = gaussian_profile(r, center, width)
    return RadialField(dr=dr, u=amplitude * profile, ut=velocity * profile)


def radiation_profile(dr, amplitude=1.0, center=3.0, width=1.0):
    """
    Outgoing profile G(eta) = amplitude ((eta - c)/w) exp(-(eta - c)^2 / (2 w^2)) on a grid aligned with 1 + j*dr.
    Its integral vanishes, so the rebuilt data are compactly supported.
    """
    first = int(np.floor((center - RADIATION_REACH * width - 1.0) / dr))
    last = int(np.ceil((center + RADIATION_REACH * width - 1.0) / dr))
    eta = 1.0 + dr * np.arange(first, last + 1)
    x = (eta - center) / width
    return RadiationProfile(eta0=float(eta[0]), d_eta=dr, G=amplitude * x * np.exp(-0.5 * x * x))


def support_radius(recipe):
    """
    Radius beyond which the data vanish or coincide with the stationary tail.
    """
    kind = recipe['kind']
    if kind == GAUSSIAN:
        return recipe.get('center', 3.0) + GAUSSIAN_REACH * recipe.get('width', 1.0)
    if kind == RADIATION_REBUILT:
        center = recipe.get('center', 3.0)
        reach = RADIATION_REACH * recipe.get('width', 1.0)
        return max(center + reach, 2.0 - center + reach)
    if kind == STATIONARY_K:
        perturbation = recipe.get('perturbation')
        return support_radius({'kind': GAUSSIAN, **perturbation}) if perturbation else 1.0
    raise ConfigError(f"unknown data kind '{kind}'; admissible kinds: {', '.join(DATA_KINDS)}")


def stationary_data(dr, r_end, k, m=3, sign=1):
    """
    (sign * Q_k, 0) sampled on the uniform grid.
    """
    q = stationary_family(m, k)[k]
    r = quadrature.grid(dr, int(round((r_end - 1.0) / dr)) + 1)
    u = sign * q.value(r)
    return RadialField(dr=dr, u=u, ut=np.zeros_like(u))


def build_data(recipe, dr, r_end, m=3):
    """
    Sample the recipe on the uniform grid of [1, r_end].
    """
    kind = recipe['kind']
    parameters = {key: value for key, value in recipe.items() if key != 'kind'}
    if kind == GAUSSIAN:
        return gaussian(dr, r_end, **parameters)
    if kind == RADIATION_REBUILT:
        return data_from_radiation(radiation_profile(dr, **parameters), r_max=r_end)
    if kind == STATIONARY_K:
        field = stationary_data(dr, r_end, parameters.get('k', 0), m, parameters.get('sign', 1))
        perturbation = parameters.get('perturbation')
        if perturbation:
            field = field + gaussian(dr, r_end, **perturbation)
        return field
    raise ConfigError(f"unknown data kind '{kind}'; admissible kinds: {', '.join(DATA_KINDS)}")
