"""Qubit transition rates during readout.

Levels are indexed 0, 1 and 2, where 2 stands for every leakage state.  A
``RateModel`` combines intrinsic rates (relaxation, thermal excitation, decay
of the leakage level) with power-dependent *per-pulse* induced transition
probabilities.  A per-pulse probability ``p`` over a pulse of length ``T`` is
spread uniformly in time as the rate ``-ln(1 - p) / T``.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from ..errors import DomainError
from ..units import h, k_B

__all__ = [
    "InducedProfile",
    "RateModel",
    "thermal_populations",
    "detailed_balance_up_rate",
]


@dataclass(frozen=True)
class InducedProfile:
    """Per-pulse transition probability versus readout photon number.

    ``p(n) = plateau * onset(n) + step_height * logistic((n - n_crit) / (width_frac * n_crit))``

    ``onset`` is 1 unless ``n_onset`` is set, in which case it is
    ``1 - exp(-n / n_onset)``.  The result is clipped to [0, 1].
    """

    plateau: float = 0.0
    step_height: float = 0.0
    n_crit: float = np.inf
    width_frac: float = 0.1
    n_onset: float = None

    def __post_init__(self):
        if not 0 <= self.plateau <= 1 or not 0 <= self.step_height <= 1:
            raise DomainError("plateau and step_height must lie in [0, 1]")
        if not self.width_frac > 0:
            raise DomainError("width_frac must be positive")
        if self.n_onset is not None and not self.n_onset > 0:
            raise DomainError("n_onset must be positive")

    def onset(self, n_bar):
        if self.n_onset is None:
            return np.ones_like(np.asarray(n_bar, dtype=float))
        return -np.expm1(-np.asarray(n_bar, dtype=float) / self.n_onset)

    def step(self, n_bar):
        if not np.isfinite(self.n_crit) or self.step_height == 0:
            return np.zeros_like(np.asarray(n_bar, dtype=float))
        width = self.width_frac * self.n_crit
        return self.step_height * expit((np.asarray(n_bar, dtype=float) - self.n_crit) / width)

    def __call__(self, n_bar):
        p = self.plateau * self.onset(n_bar) + self.step(n_bar)
        return np.clip(p, 0.0, 1.0)


def _rate_from_probability(p, duration):
    p = min(float(p), 1.0 - 1e-15)
    return -np.log1p(-p) / duration


@dataclass(frozen=True)
class RateModel:
    """Intrinsic rates (1/s) plus induced per-pulse probabilities.

    ``gamma_down_leak`` is the decay rate of the leakage level back to |1>;
    ``None`` means twice the qubit relaxation rate.
    """

    gamma_down_intrinsic: float = 0.0
    gamma_up_thermal: float = 0.0
    induced_10: InducedProfile = field(default_factory=InducedProfile)
    induced_01: InducedProfile = field(default_factory=InducedProfile)
    leak_from_1: InducedProfile = field(default_factory=InducedProfile)
    leak_from_0: InducedProfile = field(default_factory=InducedProfile)
    gamma_down_leak: float = None

    def __post_init__(self):
        if self.gamma_down_intrinsic < 0 or self.gamma_up_thermal < 0:
            raise DomainError("intrinsic rates must be >= 0")
        if self.gamma_down_leak is not None and self.gamma_down_leak < 0:
            raise DomainError("gamma_down_leak must be >= 0")

    @property
    def leak_decay(self):
        if self.gamma_down_leak is None:
            return 2.0 * self.gamma_down_intrinsic
        return self.gamma_down_leak

    def induced_probabilities(self, n_bar):
        """``{(i, j): p}`` per-pulse probabilities at ``n_bar``."""
        return {
            (1, 0): float(self.induced_10(n_bar)),
            (0, 1): float(self.induced_01(n_bar)),
            (1, 2): float(self.leak_from_1(n_bar)),
            (0, 2): float(self.leak_from_0(n_bar)),
        }

    def intrinsic_matrix(self):
        """Off-diagonal rate matrix ``Q[i, j]`` for i -> j (1/s)."""
        Q = np.zeros((3, 3))
        Q[1, 0] = self.gamma_down_intrinsic
        Q[0, 1] = self.gamma_up_thermal
        Q[2, 1] = self.leak_decay
        return Q

    def pulse_matrix(self, n_bar, duration):
        """Intrinsic plus induced rates during a pulse of ``duration`` seconds."""
        Q = self.intrinsic_matrix()
        for (i, j), p in self.induced_probabilities(n_bar).items():
            if p > 0:
                Q[i, j] += _rate_from_probability(p, duration)
        return Q

    def with_plateaus(self, p10, p01, pl1, pl0):
        return replace(
            self,
            induced_10=replace(self.induced_10, plateau=float(p10)),
            induced_01=replace(self.induced_01, plateau=float(p01)),
            leak_from_1=replace(self.leak_from_1, plateau=float(pl1)),
            leak_from_0=replace(self.leak_from_0, plateau=float(pl0)),
        )

    def without_induced(self):
        return replace(
            self,
            induced_10=InducedProfile(),
            induced_01=InducedProfile(),
            leak_from_1=InducedProfile(),
            leak_from_0=InducedProfile(),
        )

    @classmethod
    def zero(cls):
        return cls()


def detailed_balance_up_rate(gamma_down, omega_q, temperature):
    """Thermal excitation rate ``gamma_down * exp(-h omega_q / k T)``."""
    if temperature <= 0:
        return 0.0
    return float(gamma_down * np.exp(-h * omega_q / (k_B * temperature)))


def thermal_populations(omega_q, alpha_q, temperature, n_levels=6):
    """Boltzmann populations of |0>, |1> and the lumped leakage levels (k >= 2).

    Transmon levels follow ``E_k = k omega_q + alpha_q k (k - 1) / 2``.
    """
    if temperature <= 0:
        return np.array([1.0, 0.0, 0.0])
    k = np.arange(n_levels)
    energies = k * omega_q + 0.5 * alpha_q * k * (k - 1)
    w = np.exp(-h * (energies - energies[0]) / (k_B * temperature))
    w /= w.sum()
    return np.array([w[0], w[1], w[2:].sum()])
