"""Plateau analytics for strongly driven population dynamics.

Under strong driving <sigma_z> breaks into plateaus centred on t = n pi / omega
and separated by sharp jumps at t = (2n - 1) pi / (2 omega). Each plateau
carries a fixed number of fast quasi-periodic oscillations.

The analytic side (counts, extrema, deviation functions and their bounds,
piecewise integrals) works with plateau-local time offsets
t in [-pi/(2 omega), pi/(2 omega)]. The empirical side segments sampled
trajectories and measures the same quantities.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.signal import find_peaks

from .cdt import CDT_RADIUS, phase_phi2
from .chrw import nearest_cdt_ratio, phase_phi1, solve_xi
from .errors import DomainError, PreconditionError

INTERIOR_COS = 0.2
CENTRAL_FRACTION = 0.6
PROMINENCE_FRACTION = 0.1
MIN_SAMPLES_PER_PERIOD = 64
MIN_PERIODS = 4
KINDS = ("even", "odd")


def predicted_oscillation_count(params):
    """floor(2A / (omega pi)) - floor(A / (omega pi))."""
    if params.amplitude < 0:
        raise DomainError("amplitude must be non-negative")
    r = params.amplitude / (params.omega * math.pi)
    return int(math.floor(2.0 * r) - math.floor(r))


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError(f"kind must be 'even' or 'odd', got {kind!r}")


@dataclass(frozen=True)
class Extremum:
    time: float
    label: str  # "max" or "min"


def _stationary_levels(params, xi, kind):
    """Values v of sin(omega t) at stationary points, with their max/min labels."""
    if kind == "even":
        scale = params.amplitude * xi / params.omega
        offset = 0.5
    else:
        scale, offset = params.a_over_omega, 0.0
    if scale <= 0:
        return []
    m_hi = int(math.floor(scale / math.pi - offset))
    m_lo = int(math.ceil(-scale / math.pi - offset))
    out = []
    for m in range(m_lo, m_hi + 1):
        v = (m + offset) * math.pi / scale
        if abs(v) <= 1.0:
            # even kind: max at m even; odd kind: min at m even
            label = ("max" if m % 2 == 0 else "min") if kind == "even" else (
                "min" if m % 2 == 0 else "max")
            out.append((v, label))
    return out


def extrema_times(params, xi, kind, window):
    """Stationary points of the plateau deviation function inside ``window``.

    With t the offset from the plateau centre n pi / omega:
    even kind: Xi sin(omega t) = m pi + pi/2, maxima at even m, the same on every plateau;
    odd kind: (A/omega) sin(omega t) = m pi, minima at even m for even n. The odd-kind
    integrand changes sign with n, so the labels swap on odd plateaus.
    ``window`` must lie inside one plateau interval around n pi / omega.
    """
    _check_kind(kind)
    lo, hi = window
    if not hi > lo:
        return []
    w = params.omega
    n = round(0.5 * (lo + hi) * w / math.pi)
    centre = n * math.pi / w
    half = 0.5 * math.pi / w
    if lo < centre - half - 1e-12 or hi > centre + half + 1e-12:
        raise DomainError("window must lie within a single plateau interval")
    swap = kind == "odd" and n % 2 == 1
    found = []
    for v, label in _stationary_levels(params, xi, kind):
        t = centre + math.asin(v) / w
        if swap:
            label = "max" if label == "min" else "min"
        if lo <= t <= hi:
            found.append(Extremum(t, label))
    return sorted(found, key=lambda e: e.time)


def _check_offset(params, t, strict):
    t = np.asarray(t, dtype=float)
    limit = 0.5 * math.pi / params.omega
    bad = np.abs(t) >= limit if strict else np.abs(t) > limit * (1 + 1e-14)
    if np.any(bad) or not np.all(np.isfinite(t)):
        raise DomainError("offset must satisfy |t| " + ("<" if strict else "<=") + " pi/(2 omega)")
    return t


def deviation_g(params, xi, kind, t):
    """Deviation from the plateau anchor, delta * int_0^t of the plateau integrand.

    even: integrand cos(Xi sin(omega tau)); odd: sin((A/omega) sin(omega tau)).
    """
    _check_kind(kind)
    t = _check_offset(params, t, strict=False)
    if kind == "even":
        return phase_phi1(params, xi, t)
    return phase_phi2(params, t)


def envelope_bound(params, xi, kind, t):
    """2 delta / (A xi cos(omega t)) for even kind, 2 delta / (A cos(omega t)) for odd kind."""
    _check_kind(kind)
    t = _check_offset(params, t, strict=True)
    scale = params.amplitude * (xi if kind == "even" else 1.0)
    return 2.0 * params.delta / (scale * np.cos(params.omega * t))


def _piece(params, fn, scale, n):
    w = params.omega
    lo, hi = n * math.pi / (2.0 * scale), (n + 1) * math.pi / (2.0 * scale)
    if hi > 1.0:
        raise DomainError(f"piece {n} extends past x = 1")
    value, _ = integrate.quad(lambda x: fn(scale * x) / math.sqrt(1.0 - x * x), lo, hi,
                              epsabs=1e-14, epsrel=1e-12, limit=200)
    return params.delta / w * value


def even_pieces(params, xi, n_max):
    """A_n = (delta/omega) int cos(Xi x)/sqrt(1 - x^2) dx over [n pi/(2 Xi), (n+1) pi/(2 Xi)]."""
    scale = params.amplitude * xi / params.omega
    return np.array([_piece(params, math.cos, scale, n) for n in range(n_max + 1)])


def odd_pieces(params, n_max):
    """B_n, as :func:`even_pieces` with sin((A/omega) x) and no xi."""
    scale = params.a_over_omega
    return np.array([_piece(params, math.sin, scale, n) for n in range(n_max + 1)])


def phase_speed(signal, dt, is_phase=False):
    """Rate of change of the underlying phase, |d theta/dt| with theta = arccos(z).

    Larger of the two one-sided differences at every sample, so a kink where
    the phase passes through 0 or pi does not look like a stationary point.
    """
    theta = np.asarray(signal, dtype=float) if is_phase else np.arccos(np.clip(signal, -1.0, 1.0))
    d = np.abs(np.diff(theta)) / dt
    if len(d) == 0:
        return np.zeros_like(theta)
    v = np.empty_like(theta)
    v[1:-1] = np.maximum(d[1:], d[:-1])
    v[0], v[-1] = d[0], d[-1]
    return v


def count_oscillations(speed):
    """Quasi-periods in one plateau, from prominent minima of the phase speed.

    Each quasi-period contributes a pair of stationary points; an unpaired one
    at a window edge is counted as a period.
    """
    top = float(np.max(speed)) if len(speed) else 0.0
    if top <= 1e-9:
        return 0
    minima, _ = find_peaks(-speed, prominence=PROMINENCE_FRACTION * top)
    return int(math.ceil(len(minima) / 2))


@dataclass
class PlateauSegment:
    index: int
    t_start: float
    t_end: float
    mean_level: float
    oscillation_count: int
    max_deviation: float
    envelope_ok: bool


@dataclass
class PlateauReport:
    segments: list
    predicted_count: int
    pattern: str
    period_of_pattern: float
    omega: float = 1.0
    signal: str = field(default="z")

    @property
    def counts(self):
        return [s.oscillation_count for s in self.segments]

    @property
    def means(self):
        return np.array([s.mean_level for s in self.segments])

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment_index", "t_start", "t_end", "mean", "oscillations", "max_dev",
                    "envelope_ok"])
        for s in self.segments:
            w.writerow([s.index, f"{self.omega * s.t_start:.12g}", f"{self.omega * s.t_end:.12g}",
                        f"{s.mean_level:.12g}", s.oscillation_count, f"{s.max_deviation:.12g}",
                        str(s.envelope_ok).lower()])
        fh.write(f"# predicted_N={self.predicted_count} pattern={self.pattern} "
                 f"period_of_pattern={self.omega * self.period_of_pattern:.12g}\n")

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def plateau_pattern(params):
    """'armchair' near a J0 zero, else 'zigzag'."""
    if params.amplitude > 0 and nearest_cdt_ratio(params.a_over_omega) <= CDT_RADIUS:
        return "armchair"
    return "zigzag"


def _z_bound(level, q):
    """Largest |cos(phi + g) - cos(phi)| over |g| <= q, with phi = arccos(level)."""
    phi = math.acos(min(1.0, max(-1.0, level)))
    c = math.cos(phi)
    q = np.asarray(q, dtype=float)
    lo, hi = phi - q, phi + q
    out = np.maximum(np.abs(np.cos(lo) - c), np.abs(np.cos(hi) - c))

    def contains(offset):
        # does [lo, hi] contain a point 2 k pi + offset
        return np.floor((hi - offset) / (2 * math.pi)) >= np.ceil((lo - offset) / (2 * math.pi))

    out = np.where(contains(0.0), np.maximum(out, 1.0 - c), out)
    return np.where(contains(math.pi), np.maximum(out, 1.0 + c), out)


def detect_plateaus(traj, params, xi=None, signal="z", values=None):
    """Segment a sampled trajectory into plateaus and measure each one.

    ``signal="z"`` analyses ``traj.z``; ``signal="phase"`` analyses ``values``
    (a phase function sampled on ``traj.times``), checked against the raw
    deviation bound rather than its cosine image.
    """
    times = np.asarray(traj.times, dtype=float)
    w = params.omega
    period = 2.0 * math.pi / w
    if len(times) < 2:
        raise PreconditionError("trajectory too short")
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-6, atol=1e-12):
        raise PreconditionError("trajectory must be uniformly sampled")
    if period / dt < MIN_SAMPLES_PER_PERIOD * (1 - 1e-9):
        raise PreconditionError(f"need >= {MIN_SAMPLES_PER_PERIOD} samples per drive period")
    if times[-1] - times[0] < MIN_PERIODS * period * (1 - 1e-9):
        raise PreconditionError(f"need >= {MIN_PERIODS} drive periods of data")
    if signal == "z":
        y = np.asarray(traj.z, dtype=float)
    elif signal == "phase":
        if values is None:
            raise ValueError("phase analysis needs the sampled phase in 'values'")
        y = np.asarray(values, dtype=float)
    else:
        raise ValueError("signal must be 'z' or 'phase'")

    pattern = plateau_pattern(params)
    kind = "odd" if pattern == "armchair" else "even"
    if kind == "even" and xi is None:
        xi = solve_xi(params) if params.delta > 0 and params.amplitude > 0 else 1.0
    speed = phase_speed(y, dt, is_phase=(signal == "phase"))
    half = 0.5 * math.pi / w
    tol = 1e-9 * dt
    segments = []
    n = max(1, int(math.ceil((times[0] + half) * w / math.pi - 1e-9)))
    while (n * math.pi / w) + half <= times[-1] + tol:
        centre = n * math.pi / w
        in_seg = (times >= centre - half - tol) & (times <= centre + half + tol)
        offset = times[in_seg] - centre
        seg = y[in_seg]
        central = np.abs(offset) <= CENTRAL_FRACTION * half + tol
        mean = float(np.mean(seg[central]))
        interior = np.abs(np.cos(w * offset)) >= INTERIOR_COS
        dev = np.abs(seg[interior] - mean)
        max_dev = float(dev.max()) if dev.size else 0.0
        if params.delta == 0.0 or params.amplitude == 0.0:
            bound = np.zeros(dev.size)
        else:
            bound = envelope_bound(params, xi if kind == "even" else 1.0, kind, offset[interior])
            if signal == "z":
                bound = _z_bound(mean, bound)
        env_ok = bool(np.all(dev <= bound + 1e-12))
        segments.append(PlateauSegment(
            index=n, t_start=centre - half, t_end=centre + half, mean_level=mean,
            oscillation_count=count_oscillations(speed[in_seg]),
            max_deviation=max_dev, envelope_ok=env_ok))
        n += 1
    period_of_pattern = (2.0 if pattern == "armchair" else 1.0) * math.pi / w
    return PlateauReport(segments, predicted_oscillation_count(params), pattern,
                         period_of_pattern, omega=w, signal=signal)


def jump_times(traj, omega=None, min_jump=0.2, values=None):
    """Jump times between neighbouring plateaus.

    The jump time is where the signal crosses the midpoint of the two adjacent
    plateau means (central 60% averages), taking the crossing nearest to the
    nominal boundary (2n - 1) pi / (2 omega). Returns a list of
    (nominal boundary, jump time, jump size); boundaries whose jump is
    smaller than ``min_jump`` get a NaN time, since a step that small is not
    separable from the in-plateau oscillation.
    """
    w = traj.omega if omega is None else omega
    times = np.asarray(traj.times, dtype=float)
    y = np.asarray(traj.z if values is None else values, dtype=float)
    half = 0.5 * math.pi / w
    reach = CENTRAL_FRACTION * half
    out = []
    n = 1
    while n * math.pi / w + reach <= times[-1] + 1e-12:
        left, right = (n - 1) * math.pi / w, n * math.pi / w
        m_left = y[np.abs(times - left) <= reach].mean()
        m_right = y[np.abs(times - right) <= reach].mean()
        jump = float(m_right - m_left)
        nominal = left + half
        t_jump = float("nan")
        if abs(jump) >= min_jump:
            idx = np.nonzero((times >= left) & (times <= right))[0]
            s = y[idx] - 0.5 * (m_left + m_right)
            k = np.nonzero(np.sign(s[:-1]) != np.sign(s[1:]))[0]
            if len(k):
                t0, t1 = times[idx[k]], times[idx[k + 1]]
                crossings = t0 - s[k] * (t1 - t0) / (s[k + 1] - s[k])
                t_jump = float(crossings[np.argmin(np.abs(crossings - nominal))])
        out.append((nominal, t_jump, jump))
        n += 1
    return out
