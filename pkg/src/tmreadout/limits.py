"""High-power photon limits, the equivalent transverse scheme, coherence budget.

Critical photon numbers mark where each approximation behind the cross-Kerr
readout Hamiltonian breaks down:

* ``n_rwa``  first non-RWA terms ``q^dag^2 c^dag c`` hybridize |1,n> with |3,n>
* ``n_rwa2`` non-RWA terms ``q^dag^2 c^2`` (relevant when omega_q > |omega_r - omega_q|)
* ``n_bifurc`` onset of readout-mode bistability
* ``n_lowphi`` breakdown of the fourth-order (low phase-drop) expansion of
  the ancilla cosine, referred to the readout polariton

Degenerate limits (vanishing coupling, anharmonicity or mixing) are reported
as ``inf`` so that parameter sweeps never abort.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InversionError
from .units import TWO_PI, bose_occupation, h, hbar, k_B

__all__ = [
    "CriticalPhotons",
    "TransverseEquivalent",
    "CoherenceBudget",
    "critical_photon_numbers",
    "critical_photons",
    "standard_dispersive_shift",
    "equivalent_transverse",
    "dielectric_relaxation_rate",
    "thermal_dephasing_rate",
    "coherence_budget",
]

CONVENTIONS = ("angular", "cyclic")


@dataclass(frozen=True)
class CriticalPhotons:
    n_rwa: float
    n_rwa2: float
    n_bifurc: float
    n_lowphi_ancilla: float
    n_lowphi: float
    n_crit: float
    omega_13: float

    @property
    def limiting(self):
        """Name of the smallest limit."""
        values = {
            "n_rwa": self.n_rwa,
            "n_rwa2": self.n_rwa2,
            "n_bifurc": self.n_bifurc,
            "n_lowphi": self.n_lowphi,
        }
        return min(values, key=values.get)


@dataclass(frozen=True)
class TransverseEquivalent:
    g_x: float
    T1_purcell: float
    n_std_crit: float
    convention: str = "angular"


@dataclass(frozen=True)
class CoherenceBudget:
    gamma1_diel: float
    Q_diel: float
    T2_thermal: float
    T_eff: float
    n_th_l: float
    n_th_r: float


def _safe_ratio(num, den):
    return np.inf if den == 0 else abs(num / den)


def critical_photon_numbers(
    omega_13, omega_r, chi_qr, kappa_r, alpha_r, theta, E_J, E_Ca, dilution
):
    """Critical photon numbers from plain numbers (all frequencies in Hz)."""
    if kappa_r < 0:
        raise DomainError("kappa_r must be >= 0")
    if not E_Ca > 0:
        raise DomainError("E_Ca must be positive")
    if not dilution >= 1:
        raise DomainError("dilution factor 1 + 2 L_J / L_a must be >= 1")
    n_rwa = _safe_ratio(omega_13, np.sqrt(6.0) * chi_qr)
    n_rwa2 = (2.0 / np.sqrt(6.0)) * _safe_ratio(2.0 * omega_r - omega_13, chi_qr)
    n_bifurc = _safe_ratio(kappa_r, 3.0 * np.sqrt(3.0) * alpha_r)
    n_a = 0.5 * np.sqrt(E_J * dilution / E_Ca)
    n_lowphi = _safe_ratio(n_a, np.sin(theta) ** 2)
    values = [n_rwa, n_rwa2, n_bifurc, n_lowphi]
    return CriticalPhotons(
        n_rwa=float(n_rwa),
        n_rwa2=float(n_rwa2),
        n_bifurc=float(n_bifurc),
        n_lowphi_ancilla=float(n_a),
        n_lowphi=float(n_lowphi),
        n_crit=float(min(values)),
        omega_13=float(omega_13),
    )


def critical_photons(bare, pol, circuit, omega_13=None):
    """Critical photon numbers of the readout polariton.

    Parameters
    ----------
    bare : BareModeParams
    pol : PolaritonParams
        The upper polariton is taken as the readout mode.
    circuit : CircuitParams
        Supplies the single-junction ``E_J``.
    omega_13 : float, optional
        Qubit 1 -> 3 transition (Hz).  Defaults to ``2 omega_q + 3 alpha_q``;
        pass the diagonalized value when it is available.
    """
    if omega_13 is None:
        omega_13 = bare.omega_13
    return critical_photon_numbers(
        omega_13=omega_13,
        omega_r=pol.omega_r,
        chi_qr=pol.chi_qr,
        kappa_r=pol.kappa_r,
        alpha_r=pol.alpha_r,
        theta=pol.theta,
        E_J=circuit.E_J,
        E_Ca=bare.E_Ca,
        dilution=bare.dilution,
    )


def standard_dispersive_shift(g_x, detuning, alpha_q):
    """Transverse-coupling dispersive shift ``g^2 alpha / (Delta (Delta + alpha))``."""
    return g_x**2 * alpha_q / (detuning * (detuning + alpha_q))


def equivalent_transverse(bare, pol, kappa_out, convention="angular"):
    """Transversely coupled transmon with the same frequencies and dispersive shift.

    The qubit and resonator frequencies are matched to ``omega_q`` and
    ``omega_r``; the coupling ``g_x`` is chosen so the standard dispersive shift
    equals ``chi_qr``.  ``convention`` selects how the Purcell time converts a
    frequency ratio into seconds: ``"angular"`` uses ``2 pi kappa_out``,
    ``"cyclic"`` uses ``kappa_out`` as is.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    detuning = bare.omega_q - pol.omega_r
    alpha_q = bare.alpha_q
    chi = pol.chi_qr
    if alpha_q == 0 or detuning == 0 or detuning + alpha_q == 0:
        raise DomainError("equivalent coupling undefined for zero alpha_q or detuning")
    radicand = chi * detuning * (detuning + alpha_q) / alpha_q
    if radicand < 0:
        raise DomainError(
            f"no transverse equivalent: g_x^2 = {radicand:.4g} Hz^2 is negative "
            f"(chi_qr={chi:.4g}, Delta={detuning:.4g}, alpha_q={alpha_q:.4g})"
        )
    g_x = np.sqrt(radicand)
    if g_x == 0:
        return TransverseEquivalent(0.0, np.inf, np.inf, convention)
    kappa = TWO_PI * kappa_out if convention == "angular" else kappa_out
    t1 = np.inf if kappa == 0 else detuning**2 / (kappa * g_x**2)
    n_std = detuning**2 / (2.0 * g_x) ** 2
    return TransverseEquivalent(float(g_x), float(t1), float(n_std), convention)


def dielectric_relaxation_rate(omega_q, E_Cq, Q_diel, phi01_sq, temperature):
    """Dielectric-loss relaxation rate (1/s).

    ``Gamma = hbar w^2 / (4 E_C Q) |<0|phi|1>|^2 [coth(hbar w / 2 k T) + 1]``
    evaluated in SI units (``w = 2 pi omega_q``, ``E_C = h E_Cq``).
    """
    w = TWO_PI * omega_q
    if temperature > 0:
        x = hbar * w / (2.0 * k_B * temperature)
        thermal = 1.0 / np.tanh(x) + 1.0
    else:
        thermal = 2.0
    return hbar * w**2 / (4.0 * h * E_Cq * Q_diel) * phi01_sq * thermal


def thermal_dephasing_rate(pol, temperature, convention="cyclic"):
    """Dephasing rate (1/s) from thermal photons in both polaritons.

    Sum over the lower polariton and the readout mode of
    ``n (n + 1) (2 chi)^2 / kappa``.  With ``"cyclic"`` the frequencies enter
    in Hz; ``"angular"`` multiplies the result by 2 pi.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    rate = 0.0
    for freq, chi, kappa in (
        (pol.omega_l, pol.chi_ql, pol.kappa_l),
        (pol.omega_u, pol.chi_qu, pol.kappa_u),
    ):
        n = bose_occupation(freq, temperature)
        if n > 0:
            if kappa <= 0:
                raise DomainError("thermal dephasing needs positive polariton losses")
            rate += n * (n + 1.0) * (2.0 * chi) ** 2 / kappa
    return rate * (TWO_PI if convention == "angular" else 1.0)


def _exactly_one(a, b, names):
    if (a is None) == (b is None):
        raise ValueError(f"supply exactly one of {names[0]} / {names[1]}")


def coherence_budget(
    bare,
    pol,
    *,
    Q_diel=None,
    T1_target=None,
    temperature=None,
    T2_target=None,
    phi01_sq=None,
    convention="cyclic",
    T_bracket=(1e-4, 5.0),
):
    """Dielectric T1 and thermal-photon T2 budget, forward or inverted.

    Exactly one of ``Q_diel`` / ``T1_target`` and one of ``temperature`` /
    ``T2_target`` must be given.  Targets are inverted for the quality factor
    and the effective temperature respectively.  The temperature is resolved
    first and then used in the dielectric formula.

    ``phi01_sq`` defaults to the transmon zero-point value ``sqrt(2 E_Cq / E_Jq)``.
    """
    _exactly_one(Q_diel, T1_target, ("Q_diel", "T1_target"))
    _exactly_one(temperature, T2_target, ("temperature", "T2_target"))
    if phi01_sq is None:
        phi01_sq = np.sqrt(2.0 * bare.E_Cq / bare.E_Jq)

    if temperature is None:
        target = 1.0 / T2_target
        lo, hi = T_bracket

        def mismatch(log_t):
            return np.log(thermal_dephasing_rate(pol, np.exp(log_t), convention) + 1e-300) - np.log(
                target
            )

        f_lo, f_hi = mismatch(np.log(lo)), mismatch(np.log(hi))
        if not (f_lo < 0 < f_hi):
            raise InversionError(
                f"T2 target {T2_target:.4g} s not bracketed on T in [{lo:g}, {hi:g}] K: "
                f"rate mismatch (log) {f_lo:.3g} .. {f_hi:.3g}"
            )
        temperature = float(np.exp(brentq(mismatch, np.log(lo), np.log(hi), xtol=1e-14)))

    if Q_diel is None:
        # the rate is exactly proportional to 1/Q
        Q_diel = dielectric_relaxation_rate(bare.omega_q, bare.E_Cq, 1.0, phi01_sq, temperature) * (
            T1_target
        )
    gamma1 = dielectric_relaxation_rate(bare.omega_q, bare.E_Cq, Q_diel, phi01_sq, temperature)
    rate2 = thermal_dephasing_rate(pol, temperature, convention)
    return CoherenceBudget(
        gamma1_diel=float(gamma1),
        Q_diel=float(Q_diel),
        T2_thermal=float(np.inf if rate2 == 0 else 1.0 / rate2),
        T_eff=float(temperature),
        n_th_l=bose_occupation(pol.omega_l, temperature),
        n_th_r=bose_occupation(pol.omega_u, temperature),
    )
