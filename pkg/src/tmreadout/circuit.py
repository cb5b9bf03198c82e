"""Analytic mode parameters of the transmon molecule and its readout polaritons.

The transmon molecule is two nominally identical junctions (energy ``E_J``,
shunt capacitance ``C_s``) closed by a SQUID-chain inductance ``L_a`` with a
capacitance ``C_t`` across it.  At integer flux this gives a transmon-like
*qubit* mode and a weakly anharmonic *ancilla* mode coupled only through a
purely nonlinear cos(phi) term, which after a fourth-order expansion is a
cross-Kerr interaction ``2 chi_qa q^dag q a^dag a``.

The ancilla is in turn transversely coupled to a cavity; the two hybridize
into a lower and an upper polariton, the upper one being used for readout.

All frequencies and energies are cyclic Hz (energy / h).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError
from .units import PHI0, PHI0_REDUCED, e, h

__all__ = [
    "CircuitParams",
    "BareModeParams",
    "CavityParams",
    "PolaritonParams",
    "flux_tuned_inductance",
    "derive_bare_modes",
    "hybridize",
    "polariton_losses",
    "infer_bare_losses",
]


@dataclass(frozen=True)
class CircuitParams:
    """Raw electrical elements of the transmon molecule.

    Attributes
    ----------
    C_s : float
        Shunt capacitance of each junction (F).
    C_t : float
        Capacitance across the inductance (F).
    E_J : float
        Single-junction Josephson energy in Hz (E_J / h).
    L_a0 : float
        Zero-flux inductance of the SQUID chain (H).
    A_ratio : float
        Area ratio between the molecule loop and one chain SQUID.
    Phi_ext : float
        External flux threading the molecule loop (Wb).
    """

    C_s: float
    C_t: float
    E_J: float
    L_a0: float
    A_ratio: float = 28.0
    Phi_ext: float = 0.0

    def __post_init__(self):
        for name in ("C_s", "C_t", "E_J", "L_a0"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be strictly positive, got {value!r}")
        if not self.A_ratio >= 1:
            raise DomainError(f"A_ratio must be >= 1, got {self.A_ratio!r}")

    @property
    def L_a(self):
        """Flux-tuned chain inductance (H)."""
        return flux_tuned_inductance(self.L_a0, self.Phi_ext, self.A_ratio)


@dataclass(frozen=True)
class BareModeParams:
    """Qubit and ancilla parameters from the fourth-order expansion (Hz)."""

    E_Cq: float
    E_Ca: float
    E_Jq: float
    L_J: float
    omega_q: float
    omega_a: float
    alpha_q: float
    alpha_a: float
    chi_qa: float
    #: inductive dilution factor 1 + 2 L_J / L_a
    dilution: float = 1.0

    @property
    def omega_02(self):
        """Qubit 0 -> 2 transition frequency in the anharmonic-oscillator picture."""
        return 2.0 * self.omega_q + self.alpha_q

    @property
    def omega_13(self):
        """Qubit 1 -> 3 transition frequency, ``2 omega_q + 3 alpha_q``."""
        return 2.0 * self.omega_q + 3.0 * self.alpha_q


@dataclass(frozen=True)
class CavityParams:
    """Bare cavity mode and its couplings (Hz)."""

    omega_c: float
    g_ac: float
    kappa_c: float = 0.0
    kappa_a: float = 0.0
    kappa_in: float = 0.0
    kappa_out: float = 0.0

    def __post_init__(self):
        if not self.omega_c > 0:
            raise DomainError(f"omega_c must be positive, got {self.omega_c!r}")
        for name in ("kappa_c", "kappa_a", "kappa_in", "kappa_out"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")


@dataclass(frozen=True)
class PolaritonParams:
    """Hybridized ancilla-cavity modes seen by the qubit (Hz, theta in rad)."""

    theta: float
    omega_l: float
    omega_u: float
    alpha_l: float
    alpha_u: float
    chi_ql: float
    chi_qu: float
    chi_ul: float
    kappa_l: float
    kappa_u: float

    # The upper polariton is the readout mode.
    @property
    def omega_r(self):
        return self.omega_u

    @property
    def chi_qr(self):
        return self.chi_qu

    @property
    def alpha_r(self):
        return self.alpha_u

    @property
    def kappa_r(self):
        return self.kappa_u


def flux_tuned_inductance(L_a0, Phi_ext=0.0, A_ratio=28.0):
    """Inductance of the SQUID chain under external flux.

    ``L_a = L_a0 / |cos(pi Phi_ext / (Phi0 A_ratio))|`` where ``Phi0 = h / 2e``,
    so an integer number ``n`` of flux quanta gives ``L_a0 / |cos(n pi / A_ratio)|``.

    Raises
    ------
    DomainError
        If ``L_a0`` is not positive or the cosine vanishes (divergent inductance).
    """
    if not L_a0 > 0:
        raise DomainError(f"L_a0 must be positive, got {L_a0!r}")
    c = np.cos(np.pi * Phi_ext / (PHI0 * A_ratio))
    if abs(c) < 1e-9:
        raise DomainError(
            f"chain inductance diverges at Phi_ext={Phi_ext!r} Wb (cosine argument at pi/2)"
        )
    return L_a0 / abs(c)


def derive_bare_modes(circuit):
    """Derive qubit and ancilla parameters from the circuit elements.

    The ancilla anharmonicity is taken as ``-E_Ca / (1 + 2 L_J / L_a)``: the
    ancilla cosine is diluted by the linear chain inductance exactly as the
    cross-Kerr term is.  The qubit frequency uses the transmon plasma
    frequency ``sqrt(8 E_Jq E_Cq)``.

    Parameters
    ----------
    circuit : CircuitParams

    Returns
    -------
    BareModeParams
    """
    if not isinstance(circuit, CircuitParams):
        raise DomainError("derive_bare_modes expects a CircuitParams instance")
    E_Cq = e**2 / (4.0 * circuit.C_s) / h
    E_Ca = e**2 / (8.0 * circuit.C_t + 4.0 * circuit.C_s) / h
    E_J = circuit.E_J
    E_Jq = 2.0 * E_J
    L_J = PHI0_REDUCED**2 / (E_J * h)
    dilution = 1.0 + 2.0 * L_J / circuit.L_a

    chi_qa = -np.sqrt(E_Cq * E_Ca / dilution)
    alpha_q = -E_Cq
    alpha_a = -E_Ca / dilution
    omega_q = np.sqrt(8.0 * E_Jq * E_Cq) + alpha_q + chi_qa
    omega_a = 4.0 * np.sqrt(E_J * E_Ca * dilution) + alpha_a + chi_qa
    return BareModeParams(
        E_Cq=float(E_Cq),
        E_Ca=float(E_Ca),
        E_Jq=float(E_Jq),
        L_J=float(L_J),
        omega_q=float(omega_q),
        omega_a=float(omega_a),
        alpha_q=float(alpha_q),
        alpha_a=float(alpha_a),
        chi_qa=float(chi_qa),
        dilution=float(dilution),
    )


def _mixing_angle(omega_a, omega_c, g_ac):
    detuning = omega_c - omega_a
    if detuning == 0:
        return np.pi / 4 if g_ac >= 0 else -np.pi / 4
    # atan2 keeps omega_u the upper branch for either detuning sign.
    return 0.5 * np.arctan2(2.0 * g_ac, detuning)


def polariton_losses(kappa_c, kappa_a, theta):
    """Forward loss mixing: returns ``(kappa_l, kappa_u)``."""
    s2, c2 = np.sin(theta) ** 2, np.cos(theta) ** 2
    return kappa_c * s2 + kappa_a * c2, kappa_c * c2 + kappa_a * s2


def hybridize(bare, cavity):
    """Hybridize the ancilla with the cavity into lower/upper polaritons.

    ``l = cos(theta) a + sin(theta) c`` and ``u = -sin(theta) a + cos(theta) c``
    with ``theta = atan2(2 g_ac, omega_c - omega_a) / 2``.  The frequencies use
    the level-repulsion sign so that ``omega_u - omega_l`` equals the full
    normal-mode splitting ``sqrt((omega_c - omega_a)^2 + 4 g_ac^2)``.
    """
    theta = _mixing_angle(bare.omega_a, cavity.omega_c, cavity.g_ac)
    s, c = np.sin(theta), np.cos(theta)
    s2, c2 = s * s, c * c
    splitting_term = np.sin(2.0 * theta) * cavity.g_ac
    omega_l = s2 * cavity.omega_c + c2 * bare.omega_a - splitting_term
    omega_u = c2 * cavity.omega_c + s2 * bare.omega_a + splitting_term
    kappa_l, kappa_u = polariton_losses(cavity.kappa_c, cavity.kappa_a, theta)
    return PolaritonParams(
        theta=float(theta),
        omega_l=float(omega_l),
        omega_u=float(omega_u),
        alpha_l=float(c2 * c2 * bare.alpha_a),
        alpha_u=float(s2 * s2 * bare.alpha_a),
        chi_ql=float(c2 * bare.chi_qa),
        chi_qu=float(s2 * bare.chi_qa),
        chi_ul=float(2.0 * c2 * s2 * bare.alpha_a),
        kappa_l=float(kappa_l),
        kappa_u=float(kappa_u),
    )


def infer_bare_losses(kappa_l_meas, kappa_u_meas, theta):
    """Invert the polariton loss mixing for the bare cavity and ancilla losses.

    Returns
    -------
    (kappa_c, kappa_a)

    Raises
    ------
    DegeneracyError
        At ``theta = pi/4`` where both polaritons are equal mixtures.
    """
    s2, c2 = np.sin(theta) ** 2, np.cos(theta) ** 2
    det = s2 * s2 - c2 * c2  # = -cos(2 theta)
    if abs(det) < 1e-12:
        raise DegeneracyError("loss inversion is singular at theta = pi/4")
    kappa_c = (s2 * kappa_l_meas - c2 * kappa_u_meas) / det
    kappa_a = (s2 * kappa_u_meas - c2 * kappa_l_meas) / det
    return float(kappa_c), float(kappa_a)
