"""Fourier magnitude spectra of <sigma_z> and their predicted peak sets.

F(nu) = | int z(t) exp(i nu t) dt | over the finite record, with a rectangular
window, zero-padded four times so that peaks can be located between the
natural bins. Frequencies are in units of omega throughout.
"""

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d

from .errors import PreconditionError

PAD_FACTOR = 4
PEAK_FRACTION = 0.05
DETECTION_FRACTION = 0.01
PEAK_WINDOW_BINS = 2


@dataclass
class Spectrum:
    """One-sided magnitude spectrum on nu / omega >= 0."""

    frequencies: np.ndarray
    magnitudes: np.ndarray
    resolution: float
    peaks: list = field(default_factory=list)
    record_energy: float = float("nan")
    pad_factor: int = PAD_FACTOR
    n_full: int = 0

    @property
    def grid_step(self):
        return self.resolution / self.pad_factor

    def two_sided_energy(self):
        """sum |F|^2 over the full two-sided padded grid, rebuilt from the one-sided half."""
        m = self.magnitudes**2
        if self.n_full % 2 == 0:
            return float(m[0] + m[-1] + 2.0 * m[1:-1].sum())
        return float(m[0] + 2.0 * m[1:].sum())

    def dominant_peak(self):
        return max(self.peaks, key=lambda p: p[1]) if self.peaks else None

    def write_csv(self, fh):
        fh.write("nu_over_omega,magnitude\n")
        for f, m in zip(self.frequencies, self.magnitudes):
            fh.write(f"{f:.12g},{m:.12g}\n")
        fh.write(f"# peaks: resolution={self.resolution:.12g}\n")
        for f, m in self.peaks:
            fh.write(f"# peak,{f:.12g},{m:.12g}\n")

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def find_spectral_peaks(frequencies, magnitudes, resolution, pad_factor=PAD_FACTOR,
                        threshold=DETECTION_FRACTION):
    """Grid points above ``threshold`` times the maximum that dominate +-2 resolution bins.

    The dominance window removes the decaying sidelobe train of the
    rectangular window, so the height threshold only needs to sit above
    numerical noise.
    """
    if len(magnitudes) == 0:
        return []
    top = float(np.max(magnitudes))
    if top <= 0:
        return []
    half_width = PEAK_WINDOW_BINS * pad_factor
    local_max = maximum_filter1d(magnitudes, size=2 * half_width + 1, mode="constant", cval=0.0)
    idx = np.nonzero((magnitudes >= local_max) & (magnitudes >= threshold * top))[0]
    # keep one point per flat top
    keep = [i for j, i in enumerate(idx) if j == 0 or i - idx[j - 1] > half_width]
    return [(float(frequencies[i]), float(magnitudes[i])) for i in keep]


def fourier_spectrum(traj, pad_factor=PAD_FACTOR, threshold=DETECTION_FRACTION):
    """Magnitude spectrum of ``traj.z``; sampling must be uniform."""
    times = np.asarray(traj.times, dtype=float)
    z = np.asarray(traj.z, dtype=float)
    if len(times) < 8:
        raise PreconditionError("record too short for a spectrum")
    steps = np.diff(times)
    dt = float(np.mean(steps))
    if np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise PreconditionError("spectrum requires uniform sampling")
    n = len(z)
    m = pad_factor * n
    # exp(+i nu t): conjugate of numpy's forward transform for real input
    coeffs = np.fft.rfft(z, n=m) * dt
    mags = np.abs(coeffs)
    omega = traj.omega
    freqs = 2.0 * math.pi * np.arange(len(mags)) / (m * dt) / omega
    resolution = 2.0 * math.pi / (n * dt) / omega
    spectral = Spectrum(freqs, mags, resolution, pad_factor=pad_factor, n_full=m,
                    record_energy=float(m * dt * dt * np.sum(z * z)))
    spectral.peaks = find_spectral_peaks(freqs, mags, resolution, pad_factor, threshold)
    return spectral


def predicted_peaks(rp, regime, k_max):
    """Predicted peak frequencies in units of omega.

    even: |2k +- (1 - rabi/omega)| for 0 <= k <= k_max (CHRW2 dressed Rabi frequency);
    cdt:  k for 0 <= k <= 2 k_max.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if regime == "even":
        shift = 1.0 - rp.rabi_tilde / rp.omega
        values = sorted(abs(2 * k + s * shift) for k in range(k_max + 1) for s in (1, -1))
    elif regime == "cdt":
        values = [float(k) for k in range(2 * k_max + 1)]
    else:
        raise ValueError("regime must be 'even' or 'cdt'")
    out = []
    for v in values:
        if not out or v - out[-1] > 1e-12:
            out.append(float(v))
    return out


@dataclass
class MatchReport:
    matched: list          # (predicted, detected, magnitude, offset in resolution bins)
    unmatched: list        # predicted frequencies with no peak within tolerance
    unexplained: list      # detected (frequency, magnitude) not assigned to a prediction
    resolution: float
    tol_bins: int

    @property
    def all_matched(self):
        return not self.unmatched

    def detected_for(self, predicted, tol=1e-9):
        for p, d, _, _ in self.matched:
            if abs(p - predicted) <= tol:
                return d
        return None

    def to_text(self):
        lines = [f"resolution {self.resolution:.6g}  tolerance {self.tol_bins} bins",
                 f"{'predicted':>12} {'detected':>12} {'magnitude':>12} {'bins':>7}"]
        for p, d, mag, off in self.matched:
            lines.append(f"{p:12.6f} {d:12.6f} {mag:12.6g} {off:7.2f}")
        for p in self.unmatched:
            lines.append(f"{p:12.6f} {'-':>12} {'-':>12} {'-':>7}")
        for f, mag in self.unexplained:
            lines.append(f"{'-':>12} {f:12.6f} {mag:12.6g} {'-':>7}")
        return "\n".join(lines) + "\n"


def match_peaks(spectral, predicted, tol_bins=2):
    """Greedy nearest assignment of detected peaks to predicted frequencies."""
    if tol_bins < 1:
        raise ValueError("tol_bins must be >= 1")
    tol = tol_bins * spectral.resolution
    pairs = sorted(
        (abs(f - p), i, j)
        for i, p in enumerate(predicted)
        for j, (f, _) in enumerate(spectral.peaks)
        if abs(f - p) <= tol)
    used_p, used_d, matched = set(), set(), []
    for dist, i, j in pairs:
        if i in used_p or j in used_d:
            continue
        used_p.add(i)
        used_d.add(j)
        f, mag = spectral.peaks[j]
        matched.append((predicted[i], f, mag, (f - predicted[i]) / spectral.resolution))
    matched.sort()
    top = max((m for _, m in spectral.peaks), default=0.0)
    unexplained = [pk for j, pk in enumerate(spectral.peaks)
                   if j not in used_d and pk[1] >= PEAK_FRACTION * top]
    unmatched = [p for i, p in enumerate(predicted) if i not in used_p]
    return MatchReport(matched, unmatched, unexplained, spectral.resolution, tol_bins)


def pair_splitting(report, k, rp):
    """Measured separation of the k-th predicted pair (k >= 1), or None if unmatched."""
    shift = abs(1.0 - rp.rabi_tilde / rp.omega)
    lo = report.detected_for(2 * k - shift, tol=1e-9)
    hi = report.detected_for(2 * k + shift, tol=1e-9)
    if lo is None or hi is None:
        return None
    return hi - lo
