import io
import math

import numpy as np
import pytest

from drivenqubit.chrw import analytic_trajectory
from drivenqubit.errors import DomainError
from drivenqubit.exact import (BlochTrajectory, DriveParams, evolve_states, hamiltonian_at,
                               propagate, step_size)


def test_hamiltonian_examples():
    h = hamiltonian_at(DriveParams(1.0, 0.0, 1.0), 3.7)
    assert np.allclose(h, [[0, -0.5], [-0.5, 0]])
    h = hamiltonian_at(DriveParams(1.0, 10.0, 1.0), math.pi / 2)
    assert np.allclose(h, [[0, -0.5], [-0.5, 0]], atol=1e-15)
    h = hamiltonian_at(DriveParams(1.0, 10.0, 1.0), 0.0)
    assert np.allclose(h, [[-5, -0.5], [-0.5, 5]])


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 17.1])
def test_hamiltonian_hermitian_traceless(t):
    h = hamiltonian_at(DriveParams(0.7, 13.0, 1.3), t)
    assert np.allclose(h, h.conj().T)
    assert abs(np.trace(h)) < 1e-15


def test_parameter_validation():
    with pytest.raises(DomainError):
        DriveParams(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        DriveParams(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        hamiltonian_at(DriveParams(1, 1, 1), math.nan)
    with pytest.raises(DomainError):
        propagate(DriveParams(1, 1, 1), 0.0)
    with pytest.raises(DomainError):
        propagate(DriveParams(1, 1, 1), 1.0, samples_per_drive_period=32)


def test_undriven_rabi_flop():
    tr = propagate(DriveParams(1.0, 0.0, 1.0), 20.0)
    assert np.max(np.abs(tr.z - np.cos(tr.times))) < 1e-8
    assert tr.method == "exact"
    assert tr.times[-1] <= 20.0
    assert np.all(np.diff(tr.times) > 0)


def test_no_tunnelling_freezes():
    tr = propagate(DriveParams(0.0, 10.0, 1.0), 20.0)
    assert np.max(np.abs(tr.z - 1.0)) < 1e-12


def test_step_rule():
    p = DriveParams(1.0, 19.0, 1.0)
    assert step_size(p, 200) == pytest.approx(2 * math.pi / (19 * 200))


@pytest.mark.parametrize("a", [0.5, 10.0, 19.0, 30.75 * math.pi])
def test_norm_conservation(a):
    t_end = 100.0
    tr = propagate(DriveParams(1.0, a, 1.0), t_end)
    assert tr.norm_drift < 1e-9 * t_end
    assert np.max(np.abs(tr.bloch_norm() - 1.0)) < 1e-8


def test_step_halving():
    p = DriveParams(1.0, 19.0, 1.0)
    a = propagate(p, 100.0, k=1000)
    b = propagate(p, 100.0, k=2000)
    assert np.max(np.abs(a.z - b.z)) < 1e-8


def test_period_reuse_matches_direct_stepping():
    p = DriveParams(1.0, 7.0, 1.0)
    tr = propagate(p, 3 * 2 * math.pi + 1.0, samples_per_drive_period=64, k=200)
    # plain RK4 on the state vector, same grid
    h_max = 2 * math.pi / (7.0 * 200)
    dt = 2 * math.pi / 64
    nsub = math.ceil(dt / h_max - 1e-12)
    h = dt / nsub
    psi = np.array([1.0, 0.0], dtype=complex)
    f = lambda t, y: -1j * (hamiltonian_at(p, t) @ y)
    zs = [1.0]
    t = 0.0
    for _ in range(len(tr) - 1):
        for _ in range(nsub):
            k1 = f(t, psi)
            k2 = f(t + h / 2, psi + h / 2 * k1)
            k3 = f(t + h / 2, psi + h / 2 * k2)
            k4 = f(t + h, psi + h * k3)
            psi = psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        zs.append(abs(psi[0]) ** 2 - abs(psi[1]) ** 2)
    assert np.max(np.abs(np.array(zs) - tr.z)) < 1e-12


def test_drive_sign_symmetry():
    # A -> -A is the same generator as shifting the drive phase by pi
    _, s_neg = evolve_states(1.0, -10.0, 1.0, 30.0, 128)
    _, s_shift = evolve_states(1.0, 10.0, 1.0, 30.0, 128, phase=math.pi)
    z = lambda s: np.abs(s[:, 0]) ** 2 - np.abs(s[:, 1]) ** 2
    assert np.max(np.abs(z(s_neg) - z(s_shift))) < 1e-12


def test_weak_drive_matches_rwa_over_a_rabi_period():
    p = DriveParams(1.0, 0.5, 1.0)
    rabi_period = 2 * math.pi / (p.amplitude / 2)
    tr = propagate(p, rabi_period, samples_per_drive_period=128)
    rwa = analytic_trajectory(p, "rwa", tr.times)
    assert np.max(np.abs(rwa.z - tr.z)) < 0.05


def test_weak_drive_counter_rotating_correction():
    # the RWA mismatch above is the Bloch-Siegert shift; CHRW removes it
    p = DriveParams(1.0, 0.5, 1.0)
    tr = propagate(p, 2 * math.pi / (p.amplitude / 2), samples_per_drive_period=128)
    err = {m: np.max(np.abs(analytic_trajectory(p, m, tr.times).z - tr.z))
           for m in ("rwa", "chrw1", "chrw2")}
    assert err["chrw2"] < err["chrw1"] < 0.01 < err["rwa"]
    rms = np.sqrt(np.mean((analytic_trajectory(p, "rwa", tr.times).z - tr.z) ** 2))
    assert rms < 0.05


def test_csv_roundtrip():
    tr = propagate(DriveParams(1.0, 3.0, 2.0), 5.0, samples_per_drive_period=64)
    text = tr.to_csv()
    assert text.splitlines()[0] == "t,x,y,z,method"
    assert "\r" not in text
    first = text.splitlines()[2].split(",")
    assert float(first[0]) == pytest.approx(2.0 * tr.times[1])
    back = BlochTrajectory.read_csv(io.StringIO(text), omega=2.0)
    assert np.allclose(back.z, tr.z, atol=1e-11)
    assert np.allclose(back.times, tr.times, rtol=1e-11)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        BlochTrajectory([0, 1], [0, 0], [0, 0], [1], "exact")
    with pytest.raises(ValueError):
        BlochTrajectory([0, 0], [0, 0], [0, 0], [1, 1], "exact")
    with pytest.raises(ValueError):
        BlochTrajectory([0, 1], [0, 0], [0, 0], [1, 1], "bogus")
