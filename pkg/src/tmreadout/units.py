"""Physical constants and the single cyclic/angular conversion boundary.

Every frequency in this package is stored in cyclic Hz (omega / 2 pi).
Formulas that need angular frequencies or energies call the helpers here.
"""

import numpy as np
from scipy.constants import e, h, hbar, k as k_B

TWO_PI = 2.0 * np.pi

#: reduced flux quantum hbar / 2e (Wb)
PHI0_REDUCED = hbar / (2.0 * e)
#: flux quantum h / 2e (Wb)
PHI0 = h / (2.0 * e)

__all__ = [
    "TWO_PI",
    "PHI0",
    "PHI0_REDUCED",
    "e",
    "h",
    "hbar",
    "k_B",
    "to_angular",
    "to_cyclic",
    "hz_to_joule",
    "joule_to_hz",
    "bose_occupation",
]


def to_angular(f_hz):
    """Cyclic frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * f_hz


def to_cyclic(omega):
    """Angular frequency (rad/s) to cyclic frequency (Hz)."""
    return omega / TWO_PI


def hz_to_joule(f_hz):
    return h * f_hz


def joule_to_hz(energy):
    return energy / h


def bose_occupation(f_hz, temperature):
    """Bose-Einstein occupation of a mode at ``f_hz`` and ``temperature`` (K).

    Returns 0 for ``temperature <= 0``.
    """
    if temperature <= 0:
        return 0.0
    x = h * f_hz / (k_B * temperature)
    if x > 700.0:
        return 0.0
    return float(1.0 / np.expm1(x))
