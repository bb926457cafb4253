"""Odd-harmonic solution near the coherent-destruction-of-tunnelling condition.

Here the drive ratio A/omega sits close to a zero of J0, the static tunnelling
is switched off and the population follows

    Z(t) = cos(phi_2(t)),   phi_2(t) = delta * int_0^t sin((A/omega) sin(omega tau)) dtau.

phi_2 alternates between two plateau levels, which makes <sigma_z> a
two-level staircase. The transformation parameter is fixed to 1 throughout.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .chrw import nearest_cdt_ratio
from .errors import CDTProximityWarning, DomainError
from .exact import BlochTrajectory
from .special import bessel_j, bessel_j_orders, truncation_order

CDT_RADIUS = 0.1


def odd_coefficients(params):
    """(orders 2k-1, 2 delta J_{2k-1}(A/omega) / ((2k-1) omega)) up to the truncation order."""
    a = params.a_over_omega
    n_max = max(1, truncation_order(a))
    j = bessel_j_orders(n_max + 1, a)
    orders = np.arange(1, n_max + 2, 2)
    return orders, 2.0 * params.delta * j[orders] / (orders * params.omega)


def phase_phi2(params, t):
    """Closed form of delta * int_0^t sin((A/omega) sin(omega tau)) dtau."""
    t = np.asarray(t, dtype=float)
    if params.delta == 0.0 or params.amplitude == 0.0:
        return np.zeros_like(t)
    orders, coeffs = odd_coefficients(params)
    return (1.0 - np.cos(params.omega * np.multiply.outer(t, orders))) @ coeffs


def _warn_if_far(params):
    if nearest_cdt_ratio(params.a_over_omega) > CDT_RADIUS:
        warnings.warn(f"A/omega={params.a_over_omega:g} is more than {CDT_RADIUS} from the "
                      "nearest m*pi - pi/4; the odd-harmonic solution may not apply",
                      CDTProximityWarning, stacklevel=3)


def cdt_z(params, t):
    """cos(phi_2(t)); warns when A/omega is farther than 0.1 from every m pi - pi/4."""
    _warn_if_far(params)
    return np.cos(phase_phi2(params, t))


def rwa_rf_z(params, t):
    """Rotating-frame RWA population cos(delta J0(A/omega) t)."""
    t = np.asarray(t, dtype=float)
    return np.cos(params.delta * bessel_j(0, params.a_over_omega) * t)


def cdt_lab_bloch(params, t):
    """Primed vector (-sin phi_2, 0, cos phi_2) rotated by (A/omega) sin(omega t) about z."""
    t = np.asarray(t, dtype=float)
    phi = phase_phi2(params, t)
    theta = params.a_over_omega * np.sin(params.omega * t)
    xp, zp = -np.sin(phi), np.cos(phi)
    return np.cos(theta) * xp, -np.sin(theta) * xp, zp


@dataclass(frozen=True)
class StairLevels:
    """Plateau levels of phi_2 on even (l1) and odd (l2) plateaus.

    ``l2_asymptotic`` is the magnitude only; the large-A estimate alternates in
    sign with the plateau index, while the quoted plateau values depend only on
    the magnitude.
    """

    l1: float
    l2_exact_sum: float
    l2_asymptotic: float
    l1_corrected: float
    l2_corrected: float
    stair_height_z: float

    @property
    def top_level_z(self):
        return math.cos(self.l1_corrected)

    @property
    def bottom_level_z(self):
        return math.cos(self.l2_corrected)


def stair_levels(params):
    """Two-stair levels from the odd-order Bessel series."""
    if params.amplitude <= 0:
        raise DomainError("amplitude must be positive")
    if params.delta == 0.0:
        return StairLevels(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    orders, coeffs = odd_coefficients(params)
    # coeffs = 2 delta J_{2k-1} / ((2k-1) omega)
    base = 0.5 * coeffs
    edge = np.cos(orders * math.pi * params.omega / params.amplitude)
    l2 = float(4.0 * base.sum())
    return StairLevels(
        l1=0.0,
        l2_exact_sum=l2,
        l2_asymptotic=params.delta * math.sqrt(2.0 * math.pi / (params.amplitude * params.omega)),
        l1_corrected=float(base @ (1.0 - edge)),
        l2_corrected=float(base @ (3.0 + edge)),
        stair_height_z=1.0 - math.cos(l2),
    )


mean_levels = stair_levels


def cdt_trajectory(params, method, times):
    """BlochTrajectory tagged ``cdt-odd`` or ``rwa-rf``."""
    times = np.asarray(times, dtype=float)
    if method == "cdt-odd":
        _warn_if_far(params)
        x, y, z = cdt_lab_bloch(params, times)
    elif method == "rwa-rf":
        # rotating-frame RWA: tunnelling delta J0(A/omega) precessing about x
        angle = params.delta * bessel_j(0, params.a_over_omega) * times
        x, y, z = np.zeros_like(times), np.sin(angle), np.cos(angle)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BlochTrajectory(times, x, y, z, method, omega=params.omega)
