"""Rotating-wave solvers with counter-rotating corrections.

Three closely related analytic solutions share one RWA-shaped formula for the
primed Bloch vector and differ in the constants fed into it and in the frame
rotation back to the laboratory:

* ``rwa``   bare tunnelling and drive, identity frame;
* ``chrw1`` renormalised tunnelling/drive from the xi transformation, frame
  rotated by ``Xi sin(omega t)`` about z;
* ``chrw2`` as chrw1 but with the drive reduced by prod_k J0(X_k) and an extra
  rotation by the even-harmonic phase ``S_je(t)`` about x.

Also here: the strong-driving phase function phi_1 and its cosine.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import CDTProximityWarning, ConvergenceError, DomainError
from .exact import BlochTrajectory, DriveParams
from .special import bessel_j, bessel_j_orders

ANALYTIC_METHODS = ("rwa", "chrw1", "chrw2")
XI_UPPER = 1.5
X_K_TOL = 1e-14
CDT_EVEN_RADIUS = 0.05


def _xi_residual(delta, amplitude, omega, xi):
    return 0.5 * amplitude * (1.0 - xi) - delta * bessel_j(1, amplitude * xi / omega)


def _xi_residual_and_slope(delta, amplitude, omega, xi):
    j0, j1, j2 = bessel_j_orders(2, amplitude * xi / omega)
    f = 0.5 * amplitude * (1.0 - xi) - delta * j1
    df = -0.5 * amplitude - delta * (amplitude / omega) * 0.5 * (j0 - j2)
    return f, df


def _bisect(fun, lo, hi, flo, xtol=1e-15, maxiter=200):
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0 or hi - lo < xtol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _newton(delta, amplitude, omega, x0, lo, hi, tol, maxiter=40):
    """Newton on [lo, hi], falling back to bisection if it leaves the interval."""
    fun = lambda x: _xi_residual(delta, amplitude, omega, x)
    x = min(max(x0, lo), hi)
    for _ in range(maxiter):
        f, df = _xi_residual_and_slope(delta, amplitude, omega, x)
        if abs(f) <= tol:
            return x
        if df == 0.0:
            break
        step = f / df
        # damp steps that would leave the interval or increase |f|
        for _ in range(20):
            x_new = x - step
            if lo <= x_new <= hi and abs(_xi_residual(delta, amplitude, omega, x_new)) < abs(f):
                break
            step *= 0.5
        else:
            break
        x = x_new
    flo, fhi = fun(lo), fun(hi)
    if (flo > 0) == (fhi > 0):
        return None
    x = _bisect(fun, lo, hi, flo)
    return x if abs(fun(x)) <= max(tol, 1e-14 * max(amplitude, delta)) else None


def _scan_roots(delta, amplitude, omega, n_grid=601):
    """All sign-change brackets of the residual on (0, XI_UPPER]."""
    grid = np.linspace(XI_UPPER / n_grid, XI_UPPER, n_grid)
    vals = np.array([_xi_residual(delta, amplitude, omega, x) for x in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    return grid, vals, [(grid[i], grid[i + 1], vals[i]) for i in idx]


def solve_xi(params, continuation_step=0.5):
    """Root xi of (A/2)(1 - xi) = delta J1(A xi / omega).

    The root is followed by continuation in A from A -> 0, where
    xi -> 1 / (1 + delta/omega), so that the physical branch is selected when
    several roots coexist. If the followed branch turns back, the nearest root
    on (0, 1.5] to the last tracked value is taken.
    """
    delta, amplitude, omega = params.delta, params.amplitude, params.omega
    if delta == 0.0:
        return 1.0
    xi = 1.0 / (1.0 + delta / omega)
    if amplitude == 0.0:
        return xi
    # continuation grid: Xi = A xi / omega moves by at most ~continuation_step
    n_steps = max(8, int(math.ceil(amplitude / (omega * continuation_step))))
    start = min(amplitude, 1e-3 * omega)
    path = np.geomspace(start, amplitude, 8) if n_steps <= 8 else np.concatenate(
        [np.geomspace(start, min(amplitude, omega), 8),
         np.linspace(min(amplitude, omega), amplitude, n_steps + 1)[1:]])
    for a in path:
        tol = 1e-13 * max(a, delta)
        found = _newton(delta, a, omega, xi, max(xi - 0.1, 1e-12), min(xi + 0.1, XI_UPPER), tol)
        if found is None:
            grid, vals, brackets = _scan_roots(delta, a, omega)
            if not brackets:
                raise ConvergenceError(
                    f"no root of the xi equation in (0, {XI_UPPER}] at A={a:g}",
                    profile=np.column_stack([grid, vals]))
            lo, hi, flo = min(brackets, key=lambda b: abs(0.5 * (b[0] + b[1]) - xi))
            found = _newton(delta, a, omega, 0.5 * (lo + hi), lo, hi, tol)
            if found is None:
                found = _bisect(lambda x: _xi_residual(delta, a, omega, x), lo, hi, flo)
        xi = found
    return float(xi)


def even_coefficients(delta, capital_xi, omega):
    """X_k = delta J_2k(Xi) / (k omega), k = 1, 2, ..., trimmed below 1e-14."""
    k_cap = int(math.ceil(abs(capital_xi))) + 40
    if delta == 0.0:
        return np.zeros(0)
    j = bessel_j_orders(2 * k_cap, capital_xi)
    k = np.arange(1, k_cap + 1)
    xk = delta * j[2 * k] / (k * omega)
    big = np.nonzero(np.abs(xk) >= X_K_TOL)[0]
    return xk[: big[-1] + 1] if len(big) else np.zeros(0)


@dataclass(frozen=True)
class RenormalizedParams:
    """Dressed constants of the xi-transformed Hamiltonian."""

    delta: float
    amplitude: float
    omega: float
    xi: float
    capital_xi: float
    x_k: tuple
    delta_tilde: float
    a_tilde_chrw1: float
    a_tilde_chrw2: float
    reduction_factor: float

    @property
    def detuning_tilde(self):
        return self.omega - self.delta_tilde

    @property
    def rabi_tilde(self):
        """Dressed Rabi frequency with the CHRW2 drive."""
        return self.constants("chrw2")[3]

    @property
    def rabi_tilde_chrw1(self):
        return self.constants("chrw1")[3]

    def constants(self, method):
        """(tunnelling, drive, detuning, Rabi frequency) used by ``method``."""
        if method == "rwa":
            tunnel, drive = self.delta, self.amplitude
        elif method == "chrw1":
            tunnel, drive = self.delta_tilde, self.a_tilde_chrw1
        elif method == "chrw2":
            tunnel, drive = self.delta_tilde, self.a_tilde_chrw2
        else:
            raise ValueError(f"unknown analytic method {method!r}")
        detuning = self.omega - tunnel
        return tunnel, drive, detuning, math.hypot(detuning, 0.5 * drive)

    def without_even_harmonics(self):
        """Same constants with X_k = 0 and unit reduction, i.e. CHRW2 collapsed to CHRW1."""
        return replace(self, x_k=(), a_tilde_chrw2=self.a_tilde_chrw1, reduction_factor=1.0)


def renormalize(params, xi=None):
    """Dressed constants for ``params``; ``xi`` defaults to :func:`solve_xi`."""
    if xi is None:
        xi = solve_xi(params)
    capital_xi = params.amplitude * xi / params.omega
    xk = even_coefficients(params.delta, capital_xi, params.omega)
    reduction = float(np.prod([bessel_j(0, x) for x in xk])) if len(xk) else 1.0
    a1 = 2.0 * params.amplitude * (1.0 - xi)
    return RenormalizedParams(
        delta=params.delta, amplitude=params.amplitude, omega=params.omega,
        xi=float(xi), capital_xi=capital_xi, x_k=tuple(float(v) for v in xk),
        delta_tilde=params.delta * bessel_j(0, capital_xi),
        a_tilde_chrw1=a1, a_tilde_chrw2=a1 * reduction, reduction_factor=reduction)


def primed_bloch(rp, method, t):
    """Bloch vector (X', Y', Z') in the dressed frame, RWA form."""
    _, drive, det, rabi = rp.constants(method)
    t = np.asarray(t, dtype=float)
    w = rp.omega
    if rabi == 0.0:
        # no drive, exact resonance: the primed state only precesses with the frame
        zeros = np.zeros_like(t)
        return zeros, np.sin(w * t), np.cos(w * t)
    half = 0.5 * rabi * t
    s2, c2 = np.sin(half) ** 2, np.cos(half) ** 2
    xp = -(drive * det / rabi**2) * s2
    yp = (np.sin(w * t) * (c2 + ((0.5 * drive) ** 2 - det**2) / rabi**2 * s2)
          - (det / rabi) * np.cos(w * t) * np.sin(rabi * t))
    a = (0.5 * drive / rabi) * np.sin(half) * np.sin(0.5 * w * t)
    b = np.cos(half) * np.sin(0.5 * w * t) - (det / rabi) * np.sin(half) * np.cos(0.5 * w * t)
    zp = 1.0 - 2.0 * (a**2 + b**2)
    return xp, yp, zp


def _harmonic_sine_sum(coeffs, omega, t):
    """sum_k coeffs[k-1] sin(2 k omega t)."""
    t = np.asarray(t, dtype=float)
    if len(coeffs) == 0:
        return np.zeros_like(t)
    k = np.arange(1, len(coeffs) + 1)
    phase = 2.0 * omega * np.multiply.outer(t, k)
    return np.sin(phase) @ np.asarray(coeffs)


def s_je(rp, t):
    """Even-harmonic phase sum_k X_k sin(2 k omega t)."""
    return _harmonic_sine_sum(rp.x_k, rp.omega, t)


def frame_matrix(rp, method, t):
    """3x3 orthogonal map from the primed to the laboratory Bloch vector at scalar t."""
    if method == "rwa":
        return np.eye(3)
    theta = rp.capital_xi * math.sin(rp.omega * t)
    c, s = math.cos(theta), math.sin(theta)
    sj = float(s_je(rp, t)) if method == "chrw2" else 0.0
    cj, sn = math.cos(sj), math.sin(sj)
    return np.array([[c, s * cj, s * sn], [-s, c * cj, c * sn], [0.0, -sn, cj]])


def lab_bloch(rp, method, t):
    """Laboratory Bloch vector (X, Y, Z) for one of ``rwa``, ``chrw1``, ``chrw2``."""
    xp, yp, zp = primed_bloch(rp, method, t)
    if method == "rwa":
        return xp, yp, zp
    t = np.asarray(t, dtype=float)
    theta = rp.capital_xi * np.sin(rp.omega * t)
    c, s = np.cos(theta), np.sin(theta)
    sj = s_je(rp, t) if method == "chrw2" else np.zeros_like(t)
    cj, sn = np.cos(sj), np.sin(sj)
    x = c * xp + s * cj * yp + s * sn * zp
    y = -s * xp + c * cj * yp + c * sn * zp
    z = -sn * yp + cj * zp
    return x, y, z


def chrw2_bloch(rp, t):
    return lab_bloch(rp, "chrw2", t)


def phase_phi1(params, xi, t):
    """Delta * int_0^t cos(Xi sin(omega tau)) dtau in closed form.

    Equals delta J0(Xi) t + sum_k delta J_2k(Xi) sin(2k omega t) / (k omega),
    so it is exactly linear in t at every t = n pi / omega.
    """
    capital_xi = params.amplitude * xi / params.omega
    t = np.asarray(t, dtype=float)
    if params.delta == 0.0:
        return np.zeros_like(t)
    coeffs = even_coefficients(params.delta, capital_xi, params.omega)
    return params.delta * bessel_j(0, capital_xi) * t + _harmonic_sine_sum(coeffs, params.omega, t)


def nearest_cdt_ratio(a_over_omega):
    """Distance from A/omega to the nearest m pi - pi/4, m >= 1."""
    m = max(1, round(a_over_omega / math.pi + 0.25))
    return abs(a_over_omega - (m * math.pi - 0.25 * math.pi))


def even_harmonic_z(params, xi, t):
    """cos(phi_1(t)); warns when A/omega sits within 0.05 of a CDT ratio."""
    if params.amplitude > 0 and nearest_cdt_ratio(params.a_over_omega) < CDT_EVEN_RADIUS:
        warnings.warn(f"A/omega={params.a_over_omega:g} is close to a J0 zero; "
                      "the even-harmonic solution is not expected to hold there",
                      CDTProximityWarning, stacklevel=2)
    return np.cos(phase_phi1(params, xi, t))


def analytic_trajectory(params, method, times, xi=None):
    """BlochTrajectory for ``rwa``, ``chrw1``, ``chrw2`` or ``even-harmonic``."""
    times = np.asarray(times, dtype=float)
    if method == "even-harmonic":
        xi_used = solve_xi(params) if xi is None else xi
        z = even_harmonic_z(params, xi_used, times)
        phi = phase_phi1(params, xi_used, times)
        # primed vector (-sin phi, 0, cos phi) rotated by Xi sin(omega t)
        theta = params.amplitude * xi_used / params.omega * np.sin(params.omega * times)
        xp = -np.sin(phi)
        return BlochTrajectory(times, np.cos(theta) * xp, -np.sin(theta) * xp, z,
                               method, omega=params.omega)
    if method not in ANALYTIC_METHODS:
        raise ValueError(f"unknown analytic method {method!r}")
    rp = renormalize(params, xi)
    x, y, z = lab_bloch(rp, method, times)
    return BlochTrajectory(times, x, y, z, method, omega=params.omega)

