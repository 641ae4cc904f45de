import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qtherm import oscillators, sta
from qtherm.errors import DegenerateSpectrum, TrapInversionWarning

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)

rng = np.random.default_rng(23)


# --- Ermakov schedules --------------------------------------------------------


def test_ermakov_noop_schedule():
    s = sta.ermakov_schedule(2.0, 2.0, 5.0)
    grid = np.linspace(0, 5.0, 200)
    assert np.allclose(s.b(grid), 1.0, atol=1e-14)
    assert np.allclose(s.omega(grid), 2.0, atol=1e-12)


def test_ermakov_boundary_conditions():
    s = sta.ermakov_schedule(4.0, 1.0, 10.0)
    assert s.b(0.0) == pytest.approx(1.0, abs=1e-12)
    assert s.b(10.0) == pytest.approx(2.0, abs=1e-12)  # sqrt(omega_i/omega_f)
    for f in (s.b_dot, s.b_ddot):
        assert abs(f(0.0)) < 1e-10
        assert abs(f(10.0)) < 1e-10
    assert s.omega(0.0) == pytest.approx(4.0, abs=1e-10)
    assert s.omega(10.0) == pytest.approx(1.0, abs=1e-10)
    assert np.min(s.b(np.linspace(0, 10, 1000))) > 0


def test_ermakov_equation_residual():
    s = sta.ermakov_schedule(4.0, 1.0, 10.0)
    grid = np.linspace(0.0, 10.0, 1000)
    res = s.b_ddot(grid) + s.omega_squared(grid) * s.b(grid) - s.omega0**2 / s.b(grid) ** 3
    assert np.max(np.abs(res)) < 1e-10


def test_ermakov_fast_schedule_inverts_trap():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        s = sta.ermakov_schedule(4.0, 1.0, 0.1)
    assert any(issubclass(w.category, TrapInversionWarning) for w in caught)
    assert np.min(s.omega_squared(np.linspace(0, 0.1, 1000))) < 0


def test_ermakov_invariant_static_schedule():
    s = sta.ermakov_schedule(2.0, 2.0, 2.0)
    drift = sta.verify_ermakov_invariant(s, n_max=30, temperature=1.0)
    assert drift < 1e-9


def test_ermakov_invariant_drift_and_population_restoration():
    s = sta.ermakov_schedule(4.0, 1.0, 10.0)
    n_max = 80
    drift = sta.verify_ermakov_invariant(s, n_max=n_max, temperature=2.0)
    assert drift < 1e-6

    # endpoint populations in the instantaneous eigenbasis are restored
    rho0 = oscillators.thermal_state(4.0, 2.0, 4.0, n_max)
    ramp = oscillators.FrequencyRamp(
        lambda t: float(np.sqrt(s.omega_squared(t))), 10.0, n_max)
    u = ramp.propagator()
    rho_f = u @ rho0 @ u.conj().T
    h_f = oscillators.hamiltonian(1.0, 4.0, n_max)
    vals, vecs = np.linalg.eigh(h_f)
    pops_f = np.real(np.einsum("in,ij,jn->n", vecs.conj(), rho_f, vecs))
    pops_0 = np.diag(rho0).real  # H(0) is diagonal in the reference basis
    # compare over levels that are both populated and far from the cutoff
    assert np.max(np.abs(pops_f[:30] - pops_0[:30])) < 1e-6


# --- counterdiabatic driving ------------------------------------------------------


def test_cd_time_independent_is_zero():
    h = 0.4 * SZ + 0.3 * SX
    h_cd = sta.counterdiabatic(lambda t: h, 0.5, 1e-5)
    assert np.max(np.abs(h_cd)) < 1e-8


def test_cd_landau_zener_closed_form():
    delta = 0.7

    def omega(t):
        return -2.0 * t

    def h0(t):
        return delta * SX + omega(t) * SZ

    for t in [0.1, 0.3, 0.8]:
        h_cd = sta.counterdiabatic(h0, t, 1e-6)
        omega_dot = -2.0
        expected = -0.5 * delta * omega_dot / (delta**2 + omega(t) ** 2) * SY
        assert np.max(np.abs(h_cd - expected)) < 1e-8
        assert np.max(np.abs(h_cd - h_cd.conj().T)) < 1e-10


def test_cd_gauge_diagonal_vanishes():
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    ha, hb = (a + a.conj().T) / 2, (b + b.conj().T) / 2

    def h0(t):
        return np.diag([0.0, 1.0, 2.5, 4.0]) + 0.2 * np.cos(t) * ha + 0.2 * np.sin(t) * hb

    h_cd = sta.counterdiabatic(h0, 0.7, 1e-6)
    _, vecs = np.linalg.eigh(h0(0.7))
    diag = np.einsum("in,ij,jn->n", vecs.conj(), h_cd, vecs)
    assert np.max(np.abs(diag)) < 1e-10


def test_cd_degenerate_spectrum_raises():
    def h0(t):
        return np.diag([0.0, 1e-12, 1.0]) + 0j

    with pytest.raises(DegenerateSpectrum):
        sta.counterdiabatic(h0, 0.0, 1e-6)


def _transport_infidelity(h0, tau, level, dim):
    def rhs(t, y):
        h = h0(t) + sta.counterdiabatic(h0, t, 1e-6)
        return (-1j * h @ y.reshape(dim, 1)).reshape(-1)

    _, vecs0 = np.linalg.eigh(h0(0.0))
    sol = solve_ivp(rhs, (0.0, tau), vecs0[:, level].astype(complex),
                    method="DOP853", rtol=1e-10, atol=1e-12,
                    t_eval=np.linspace(0, tau, 11))
    worst = 0.0
    for t, psi in zip(sol.t, sol.y.T):
        _, vecs = np.linalg.eigh(h0(t))
        worst = max(worst, 1 - abs(np.vdot(vecs[:, level], psi)) ** 2)
    return worst


def test_cd_fast_landau_zener_transport():
    delta = 0.5

    def h0(t):
        return delta * SX + (-40.0 * (t - 0.05)) * SZ  # 100x faster than adiabatic

    def rhs(t, y):
        h = h0(t) + sta.counterdiabatic(h0, t, 1e-7)
        return (-1j * h @ y.reshape(2, 1)).reshape(-1)

    _, v0 = np.linalg.eigh(h0(0.0))
    sol = solve_ivp(rhs, (0.0, 0.1), v0[:, 0].astype(complex),
                    method="DOP853", rtol=1e-12, atol=1e-14)
    _, vf = np.linalg.eigh(h0(0.1))
    assert abs(np.vdot(vf[:, 0], sol.y[:, -1])) >= 1 - 1e-8


@pytest.mark.parametrize("dim", [3, 4])
def test_cd_transport_random_paths(dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    ha, hb = (a + a.conj().T) / 2, (b + b.conj().T) / 2

    def h0(t):
        base = np.diag(2.0 * np.arange(dim)).astype(complex)
        return base + 0.3 * np.cos(2 * t) * ha + 0.3 * np.sin(t) * hb

    for level in range(dim):
        assert _transport_infidelity(h0, 1.5, level, dim) < 1e-6
