import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from drivenqubit.cdt import (cdt_lab_bloch, cdt_trajectory, cdt_z, phase_phi2, rwa_rf_z,
                             stair_levels)
from drivenqubit.errors import CDTProximityWarning, DomainError
from drivenqubit.exact import DriveParams, propagate
from drivenqubit.plateau import detect_plateaus
from drivenqubit.spectrum import fourier_spectrum

# mpmath: pi * Struve H0(A/omega) equals the full odd-order Bessel sum
STRUVE_LEVEL = {6.75: 0.63835453324878871, 15.75: -0.31593424177193155,
                30.75: 0.27572962981302506}
ASYMPTOTIC_LEVEL = {6.75: 0.54433105395181736, 15.75: 0.35634832254989918,
                    30.75: 0.25503068522533532}
PHI2_QUAD_9_75PI_AT_5 = 0.055825880402784406


def cdt_params(mult, delta=1.0):
    return DriveParams(delta, mult * math.pi, 1.0)


@pytest.mark.parametrize("mult", [6.75, 15.75, 30.75])
def test_level_series_against_struve(mult):
    lv = stair_levels(cdt_params(mult))
    assert lv.l1 == 0.0
    assert lv.l2_exact_sum == pytest.approx(STRUVE_LEVEL[mult], abs=1e-12)
    assert lv.l2_asymptotic == pytest.approx(ASYMPTOTIC_LEVEL[mult], abs=1e-14)
    assert 0 <= lv.stair_height_z <= 2
    assert lv.stair_height_z == pytest.approx(1 - math.cos(lv.l2_exact_sum))


def test_corrected_levels_straddle():
    p = cdt_params(6.75)
    lv = stair_levels(p)
    # the two corrections sum back to the uncorrected odd level
    assert lv.l1_corrected + lv.l2_corrected == pytest.approx(lv.l2_exact_sum, abs=1e-13)
    scale = 2 * p.delta / p.amplitude
    assert abs(lv.l1_corrected - lv.l1) <= scale
    assert abs(lv.l2_corrected - lv.l2_exact_sum) <= scale
    assert lv.top_level_z == pytest.approx(math.cos(lv.l1_corrected))


def test_levels_edge_cases():
    assert stair_levels(DriveParams(0, 10, 1)).stair_height_z == 0
    with pytest.raises(DomainError):
        stair_levels(DriveParams(1, 0, 1))


def test_phase_closed_form_vs_quadrature():
    p = cdt_params(9.75)
    quad, _ = integrate.quad(lambda s: math.sin(9.75 * math.pi * math.sin(s)), 0, 5, limit=400,
                             epsabs=1e-13, epsrel=1e-13)
    assert quad == pytest.approx(PHI2_QUAD_9_75PI_AT_5, abs=1e-12)
    assert float(phase_phi2(p, 5.0)) == pytest.approx(PHI2_QUAD_9_75PI_AT_5, abs=1e-9)


def test_phase_levels_at_plateau_centres():
    p = cdt_params(6.75)
    lv = stair_levels(p)
    n = np.arange(0, 40)
    phi = phase_phi2(p, n * math.pi)
    assert np.allclose(phi[0::2], 0.0, atol=1e-12)
    assert np.allclose(phi[1::2], lv.l2_exact_sum, atol=1e-12)


def test_cdt_lab_vector():
    p = cdt_params(6.75)
    t = np.linspace(0, 40, 1500)
    x, y, z = cdt_lab_bloch(p, t)
    assert np.allclose(z, cdt_z(p, t))
    assert np.max(np.abs(x**2 + y**2 + z**2 - 1)) < 1e-12
    assert (float(x[0]), float(y[0]), float(z[0])) == pytest.approx((0, 0, 1))


@given(t=st.floats(0, 500))
@settings(max_examples=100, deadline=None)
def test_cdt_unit_norm_random_times(t):
    x, y, z = cdt_lab_bloch(cdt_params(15.75), np.array([t]))
    assert abs(x[0] ** 2 + y[0] ** 2 + z[0] ** 2 - 1) < 1e-12


def test_proximity_warning():
    with pytest.warns(CDTProximityWarning):
        cdt_z(DriveParams(1, 10.0, 1), np.linspace(0, 1, 5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cdt_z(cdt_params(6.75), np.linspace(0, 1, 5))


def test_rotating_frame_rwa():
    p = cdt_params(6.75)
    t = np.linspace(0, 100, 50)
    z = rwa_rf_z(p, t)
    assert np.max(np.abs(z - 1)) < 1e-2  # J0 nearly zero
    tr = cdt_trajectory(p, "rwa-rf", t)
    assert np.allclose(tr.z, z) and np.allclose(tr.bloch_norm(), 1)


def test_agreement_with_exact_short_window():
    p = cdt_params(6.75)
    tr = propagate(p, 20.0, samples_per_drive_period=256)
    assert np.max(np.abs(cdt_z(p, tr.times) - tr.z)) < 0.05


def test_plateau_means_alternate_between_corrected_levels():
    p = cdt_params(6.75)
    t = np.arange(0, 40 * math.pi + 1e-9, 2 * math.pi / 256)
    phi = phase_phi2(p, t)
    lv = stair_levels(p)
    tol = 2 * p.delta / p.amplitude
    rep = detect_plateaus(cdt_trajectory(p, "cdt-odd", t), p, signal="phase", values=phi)
    for seg in rep.segments:
        near = min(abs(seg.mean_level - lv.l1_corrected), abs(seg.mean_level - lv.l2_corrected))
        assert near <= tol
    means = rep.means
    high = means[1::2] if means[1] > means[0] else means[0::2]
    assert np.all(np.abs(high - lv.l2_corrected) <= tol)


def test_spectrum_has_both_parities():
    p = cdt_params(6.75)
    t = np.arange(0, 200 * 2 * math.pi, 2 * math.pi / 256)
    spectral = fourier_spectrum(cdt_trajectory(p, "cdt-odd", t), threshold=1e-3)
    peaks = [f for f, _ in spectral.peaks]
    res = spectral.resolution
    for harmonic in (1, 3, 4, 6):
        assert min(abs(f - harmonic) for f in peaks) <= 2 * res
    assert spectral.dominant_peak()[0] == pytest.approx(0.0, abs=res)
