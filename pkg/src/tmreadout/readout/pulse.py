"""Readout pulses, semiclassical cavity response and the analytic SNR.

The readout mode is a driven damped oscillator whose frequency is pulled by
``2 chi_qr`` per qubit excitation::

    d alpha / dt = -i (omega_r + 2 chi_qr s - omega_d) alpha - (kappa_r / 2) alpha - i eps

With ``alpha(0) = 0`` the solution is closed form, so the integrated
(time-averaged) pointer of each qubit state ``s`` is exact and no ODE stepping
is needed for the Monte-Carlo engine.  Angular rates are used inside; inputs
stay in cyclic Hz.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DomainError
from ..units import TWO_PI

__all__ = [
    "ReadoutPulse",
    "CavityResponse",
    "drive_amplitude",
    "cavity_response",
    "pointer_means",
    "snr_analytic",
    "check_depletion",
]

#: qubit levels resolved by the readout: 0, 1 and the leakage level (|2>)
N_LEVELS = 3


@dataclass(frozen=True)
class ReadoutPulse:
    """Square readout pulse.

    ``omega_d=None`` means resonant with the readout mode for the qubit in |0>.
    """

    n_bar: float
    T_r: float
    omega_d: float = None
    ring_gap: float = 500e-9

    def __post_init__(self):
        if not self.T_r > 0:
            raise DomainError(f"T_r must be positive, got {self.T_r!r}")
        if not self.n_bar >= 0:
            raise DomainError(f"n_bar must be >= 0, got {self.n_bar!r}")
        if self.ring_gap < 0:
            raise DomainError("ring_gap must be >= 0")


@dataclass(frozen=True)
class CavityResponse:
    t: np.ndarray
    alpha: np.ndarray
    n_ss: float
    epsilon: float


def _lambda(pulse, pol, s):
    omega_d = pol.omega_r if pulse.omega_d is None else pulse.omega_d
    detuning = pol.omega_r + 2.0 * pol.chi_qr * s - omega_d
    return TWO_PI * (0.5 * pol.kappa_r + 1j * detuning)


def drive_amplitude(pulse, pol):
    """Drive strength ``eps`` (rad/s) giving ``n_bar`` steady-state photons for |0>."""
    if not pol.kappa_r > 0:
        raise DomainError("kappa_r must be positive")
    return float(np.sqrt(pulse.n_bar) * abs(_lambda(pulse, pol, 0)))


def cavity_response(qubit_state, pulse, pol, dt=None):
    """Field trajectory ``alpha(t)`` on a uniform grid for a fixed qubit state.

    Parameters
    ----------
    qubit_state : int
        0, 1 or 2 (leakage).
    dt : float, optional
        Grid step in seconds; must not exceed ``1 / (20 kappa_r)``.
    """
    if not pol.kappa_r > 0:
        raise DomainError("kappa_r must be positive")
    dt_max = 1.0 / (20.0 * TWO_PI * pol.kappa_r)
    if dt is None:
        dt = dt_max
    if dt > dt_max * (1 + 1e-12):
        raise ConfigError(f"time step {dt:.3e} s exceeds 1/(20 kappa_r) = {dt_max:.3e} s")
    n_steps = int(np.ceil(pulse.T_r / dt))
    t = np.linspace(0.0, pulse.T_r, n_steps + 1)
    eps = drive_amplitude(pulse, pol)
    lam = _lambda(pulse, pol, qubit_state)
    a_ss = -1j * eps / lam
    alpha = a_ss * (1.0 - np.exp(-lam * t))
    return CavityResponse(t=t, alpha=alpha, n_ss=float(abs(a_ss) ** 2), epsilon=eps)


def pointer_means(pulse, pol, levels=N_LEVELS):
    """Time-averaged field over the pulse for each qubit level (complex array)."""
    eps = drive_amplitude(pulse, pol)
    out = np.empty(levels, dtype=complex)
    T = pulse.T_r
    for s in range(levels):
        lam = _lambda(pulse, pol, s)
        x = lam * T
        out[s] = (-1j * eps / lam) * (1.0 - (-np.expm1(-x)) / x)
    return out


def snr_analytic(pulse, pol, eta):
    """Integrated-heterodyne SNR ``sqrt(4 eta T n kappa chi^2 / (kappa^2/4 + chi^2))``.

    ``kappa_r`` and ``chi_qr`` are converted to angular units.
    """
    if eta < 0:
        raise DomainError("eta must be >= 0")
    kappa = TWO_PI * pol.kappa_r
    chi = TWO_PI * pol.chi_qr
    if kappa <= 0:
        raise DomainError("kappa_r must be positive")
    snr2 = 4.0 * eta * pulse.T_r * pulse.n_bar * kappa * chi**2 / (kappa**2 / 4.0 + chi**2)
    return float(np.sqrt(snr2))


def check_depletion(gap, pol, n_lifetimes=9.0):
    """Raise if ``gap`` is shorter than ``n_lifetimes`` field decay times ``1/kappa_r``."""
    need = n_lifetimes / (TWO_PI * pol.kappa_r)
    if gap < need:
        raise ConfigError(f"depletion gap {gap:.3e} s shorter than {n_lifetimes}/kappa_r = {need:.3e} s")
    return need
