"""Truncated harmonic-oscillator helpers.

All operators are matrices in the Fock basis of a fixed reference frequency
omega_ref, with x = (a + a†)/sqrt(2 omega_ref), p = i sqrt(omega_ref/2)(a† - a)
and unit mass, so H(omega) = p²/2 + omega² x²/2.

Frequency ramps are integrated in the instantaneous squeeze frame: with
xi(t) = ½ ln(omega(t)/omega_ref) and S(xi) = exp(xi (a² - a†²)/2) one has
S† H(omega) S = omega (a†a + ½), so after removing the diagonal phases
analytically the frame Hamiltonian is O(d omega/dt / omega) — tiny for
near-adiabatic ramps — which makes long ramps cheap and accurate.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import CutoffTooSmall


def destroy(n_max: int) -> np.ndarray:
    """Lowering operator on the (n_max+1)-dimensional Fock space."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), 1).astype(complex)


def xp_ops(omega_ref: float, n_max: int):
    a = destroy(n_max)
    x = (a + a.conj().T) / np.sqrt(2 * omega_ref)
    p = 1j * np.sqrt(omega_ref / 2) * (a.conj().T - a)
    return x, p


def hamiltonian(omega: float, omega_ref: float, n_max: int) -> np.ndarray:
    """H(omega) = p²/2 + omega² x²/2 in the reference Fock basis."""
    x, p = xp_ops(omega_ref, n_max)
    return (p @ p) / 2 + (omega**2) * (x @ x) / 2


def ladder_at(omega: float, omega_ref: float, n_max: int) -> np.ndarray:
    """Lowering operator of the omega-frequency mode in the reference basis."""
    x, p = xp_ops(omega_ref, n_max)
    return np.sqrt(omega / 2) * x + 1j * p / np.sqrt(2 * omega)


def squeeze(xi: float, n_max: int) -> np.ndarray:
    """S(xi) = exp(xi (a² - a†²)/2)."""
    a = destroy(n_max)
    g = (a @ a - a.conj().T @ a.conj().T) / 2
    # g is anti-Hermitian: diagonalize i*g (Hermitian) once
    vals, vecs = np.linalg.eigh(1j * g)
    return (vecs * np.exp(-1j * xi * vals)) @ vecs.conj().T


def thermal_populations(omega: float, temperature: float, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    w = np.exp(-omega * n / temperature)
    return w / w.sum()


def thermal_state(omega: float, temperature: float, omega_ref: float, n_max: int,
                  tail_tol: float = 1e-10) -> np.ndarray:
    """Gibbs state of H(omega) expressed in the reference Fock basis."""
    pops = thermal_populations(omega, temperature, n_max)
    if pops[-1] > tail_tol:
        raise CutoffTooSmall(
            f"top Fock level holds population {pops[-1]:.2e} > {tail_tol:.0e}"
        )
    rho = np.diag(pops).astype(complex)
    if abs(omega - omega_ref) < 1e-14 * omega_ref:
        return rho
    s = squeeze(0.5 * np.log(omega / omega_ref), n_max)
    return s @ rho @ s.conj().T


class FrequencyRamp:
    """Propagator of H(t) = p²/2 + omega(t)² x²/2 with omega(0) = omega_ref.

    ``propagator(t)`` returns the full Schrödinger-picture propagator
    U(t, 0) in the reference Fock basis.
    """

    def __init__(self, omega_of_t, tau: float, n_max: int, t_eval=None,
                 grid_points: int = 4001, rtol: float = 1e-11, atol: float = 1e-13):
        self.tau = float(tau)
        self.n_max = int(n_max)
        ts = np.linspace(0.0, tau, grid_points)
        omegas = np.array([float(omega_of_t(t)) for t in ts])
        if np.any(omegas <= 0):
            raise ValueError("frequency ramp must stay positive")
        self.omega_ref = omegas[0]
        spline = CubicSpline(ts, omegas)
        self._omega = spline
        self._omega_dot = spline.derivative()
        self._alpha = spline.antiderivative()  # int_0^t omega
        a = destroy(n_max)
        a2 = a @ a
        dim = n_max + 1

        def rhs(t, y):
            u = y.reshape(dim, dim)
            w = float(self._omega(t))
            xi_dot = float(self._omega_dot(t)) / (2 * w)
            if xi_dot == 0.0:
                return np.zeros_like(y)
            phase = np.exp(-2j * float(self._alpha(t)))
            htilde_u = -(xi_dot / 2) * (phase * (a2 @ u) - np.conj(phase) * (a2.conj().T @ u))
            return htilde_u.reshape(-1)

        w_max = float(np.max(omegas))
        t_eval = None if t_eval is None else np.asarray(t_eval, dtype=float)
        sol = solve_ivp(
            rhs, (0.0, tau), np.eye(dim, dtype=complex).reshape(-1),
            t_eval=t_eval, method="DOP853", rtol=rtol, atol=atol,
            max_step=np.pi / (4 * w_max),
        )
        self._times = sol.t
        self._frames = sol.y.T.reshape(-1, dim, dim)

    @property
    def times(self) -> np.ndarray:
        return self._times

    def propagator_at_index(self, k: int) -> np.ndarray:
        t = self._times[k]
        w = float(self._omega(t))
        xi = 0.5 * np.log(w / self.omega_ref)
        phases = np.exp(-1j * (np.arange(self.n_max + 1) + 0.5) * float(self._alpha(t)))
        u = phases[:, None] * self._frames[k]
        if xi != 0.0:
            u = squeeze(xi, self.n_max) @ u
        return u

    def propagator(self, t: float = None) -> np.ndarray:
        if t is None:
            return self.propagator_at_index(len(self._times) - 1)
        k = int(np.argmin(np.abs(self._times - t)))
        if abs(self._times[k] - t) > 1e-9 * max(1.0, self.tau):
            raise ValueError("requested time was not in t_eval")
        return self.propagator_at_index(k)


def damp_thermalize(rho: np.ndarray, omega: float, omega_ref: float,
                    temperature: float, kappa: float, tau: float,
                    n_max: int, rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Thermalize an oscillator of frequency omega toward temperature T.

    Standard damping channel with jump operators a (rate kappa(nbar+1)) and
    a† (rate kappa nbar) of the omega-mode, integrated in the interaction
    picture of H(omega) where the dissipator is time independent and the
    dynamics is non-oscillatory. The free phase is restored at the end.
    """
    xi = 0.5 * np.log(omega / omega_ref)
    s = squeeze(xi, n_max) if xi != 0.0 else np.eye(n_max + 1, dtype=complex)
    rho_f = s.conj().T @ rho @ s  # frame where H = omega(n + 1/2) is diagonal
    nbar = 1.0 / np.expm1(omega / temperature)
    a = destroy(n_max)
    ad = a.conj().T
    g_down = kappa * (nbar + 1)
    g_up = kappa * nbar
    n_op = ad @ a
    aad = a @ ad
    dim = n_max + 1

    def rhs(_t, y):
        r = y.reshape(dim, dim)
        dr = g_down * (a @ r @ ad - 0.5 * (n_op @ r + r @ n_op))
        dr += g_up * (ad @ r @ a - 0.5 * (aad @ r + r @ aad))
        return dr.reshape(-1)

    sol = solve_ivp(rhs, (0.0, tau), rho_f.reshape(-1), method="DOP853",
                    rtol=rtol, atol=atol)
    rho_f = sol.y[:, -1].reshape(dim, dim)
    phases = np.exp(-1j * omega * (np.arange(dim) + 0.5) * tau)
    rho_f = phases[:, None] * rho_f * np.conj(phases)[None, :]
    return s @ rho_f @ s.conj().T
