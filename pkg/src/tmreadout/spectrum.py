"""Exact diagonalization of the two-mode transmon-molecule Hamiltonian.

The integer-flux Hamiltonian (Hz units)::

    H = 4 E_Cq n_q^2 - E_Jq cos(phi_q)
      + 4 E_Ca n_a^2 - 2 E_J [cos(phi_a) - (L_J / L_a) phi_a^2]
      - 2 E_J [cos(phi_q) - 1] [cos(phi_a) - 1]

is written in a harmonic-oscillator Fock basis per mode, with zero-point
amplitudes chosen from each mode's quadratic part.  ``cos(phi)`` is evaluated
as an exact matrix function through the eigendecomposition of the truncated
phase operator, so no low phase-drop expansion sneaks back in.
"""

from dataclasses import dataclass, field

import numpy as np

from .circuit import CircuitParams, derive_bare_modes
from .errors import ConvergenceError, DomainError, ExtractionError

__all__ = [
    "FockCutoffs",
    "LabeledSpectrum",
    "NumericModeParams",
    "mode_operators",
    "hamiltonian_terms",
    "build_hamiltonian",
    "diagonalize_and_label",
    "extract_numeric_params",
    "numeric_mode_params",
]

#: residual tolerance of the eigensolver, relative to ||H||
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class FockCutoffs:
    n_q: int = 15
    n_a: int = 15
    max_dim: int = 4096

    def __post_init__(self):
        if self.n_q < 5 or self.n_a < 5:
            raise DomainError(f"Fock cutoffs must be >= 5, got ({self.n_q}, {self.n_a})")
        if self.n_q * self.n_a > self.max_dim:
            raise DomainError(
                f"Hilbert space {self.n_q}x{self.n_a} exceeds max_dim={self.max_dim}"
            )

    @property
    def dim(self):
        return self.n_q * self.n_a

    def doubled(self):
        return FockCutoffs(2 * self.n_q, 2 * self.n_a, max(self.max_dim, 4 * self.dim))


@dataclass
class LabeledSpectrum:
    """Eigenvalues with their assignment to bare Fock product states.

    ``labels`` maps eigenstate index -> (transmon excitations k, ancilla
    excitations n); ``overlaps`` holds the squared overlap of that assignment.
    Eigenstates whose best overlap is <= 0.5 are left unlabeled.
    """

    energies: np.ndarray
    labels: dict
    overlaps: dict
    cutoffs: FockCutoffs = None

    def __post_init__(self):
        self._index = {lab: i for i, lab in self.labels.items()}

    def index_of(self, k, n):
        try:
            return self._index[(k, n)]
        except KeyError:
            raise ExtractionError(f"state |{k},{n}> has no labeled eigenstate") from None

    def energy(self, k, n):
        return float(self.energies[self.index_of(k, n)])


@dataclass(frozen=True)
class NumericModeParams:
    """Mode parameters read off a labeled spectrum (Hz).

    ``convergence`` maps each parameter to the absolute change observed when
    the Fock cutoffs are doubled (empty if no reference run was made).
    """

    omega_q: float
    omega_a: float
    alpha_q: float
    alpha_a: float
    chi_qa: float
    omega_13: float
    convergence: dict = field(default_factory=dict)


def _ladder(n):
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


def mode_operators(n, E_C, E_L):
    """Charge, phase and cos(phase) operators of one mode in its Fock basis.

    ``E_L`` is the coefficient of the quadratic potential ``(E_L / 2) phi^2``;
    the zero-point phase is ``(2 E_C / E_L)^(1/4)``.

    Returns
    -------
    n_op : ndarray (complex)
    phi : ndarray (real)
    cos_phi : ndarray (real)
    """
    b = _ladder(n)
    phi_zpf = (2.0 * E_C / E_L) ** 0.25
    n_zpf = (E_L / (32.0 * E_C)) ** 0.25
    phi = phi_zpf * (b + b.T)
    n_op = 1j * n_zpf * (b.T - b)
    w, v = np.linalg.eigh(phi)
    cos_phi = (v * np.cos(w)) @ v.T
    return n_op, phi, cos_phi


def hamiltonian_terms(circuit, cutoffs=FockCutoffs()):
    """Return the qubit, ancilla and coupling pieces of H on the product space.

    Returns
    -------
    dict with keys ``"qubit"``, ``"ancilla"``, ``"coupling"`` (Hz matrices).
    """
    bare = derive_bare_modes(circuit)
    E_J, L_a = circuit.E_J, circuit.L_a
    E_Cq, E_Ca, E_Jq, L_J = bare.E_Cq, bare.E_Ca, bare.E_Jq, bare.L_J
    ratio = L_J / L_a

    nq_op, _, cos_q = mode_operators(cutoffs.n_q, E_Cq, E_Jq)
    # ancilla quadratic coefficient: 2 E_J (1/2 + L_J/L_a) phi^2 = (E_L/2) phi^2
    E_La = 2.0 * E_J * (1.0 + 2.0 * ratio)
    na_op, phi_a, cos_a = mode_operators(cutoffs.n_a, E_Ca, E_La)

    Iq, Ia = np.eye(cutoffs.n_q), np.eye(cutoffs.n_a)
    Hq = 4.0 * E_Cq * (nq_op @ nq_op).real - E_Jq * cos_q
    Ha = 4.0 * E_Ca * (na_op @ na_op).real - 2.0 * E_J * (cos_a - ratio * phi_a @ phi_a)
    return {
        "qubit": np.kron(Hq, Ia),
        "ancilla": np.kron(Iq, Ha),
        "coupling": -2.0 * E_J * np.kron(cos_q - Iq, cos_a - Ia),
    }


def build_hamiltonian(circuit, cutoffs=FockCutoffs()):
    """Truncated two-mode Hamiltonian in Hz, basis index ``k * n_a + n``."""
    if not isinstance(circuit, CircuitParams):
        raise DomainError("build_hamiltonian expects a CircuitParams instance")
    terms = hamiltonian_terms(circuit, cutoffs)
    H = terms["qubit"] + terms["ancilla"] + terms["coupling"]
    if not np.all(np.isfinite(H)):
        raise ConvergenceError("Hamiltonian contains non-finite entries")
    # symmetrize away round-off from the matrix functions
    return 0.5 * (H + H.T)


def diagonalize_and_label(H, cutoffs):
    """Dense Hermitian eigendecomposition plus maximum-overlap labeling."""
    H = np.asarray(H)
    try:
        energies, vecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed on {H.shape} matrix: {exc}") from exc

    scale = np.linalg.norm(H, 2) or 1.0
    residual = np.linalg.norm(H @ vecs - vecs * energies, axis=0).max()
    if residual > RESIDUAL_TOL * scale:
        raise ConvergenceError(
            f"eigen-residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e} * ||H|| = "
            f"{RESIDUAL_TOL * scale:.3e}"
        )

    weights = np.abs(vecs) ** 2  # weights[bare, eig]
    best = weights.argmax(axis=0)
    best_w = weights[best, np.arange(weights.shape[1])]
    labels, overlaps = {}, {}
    for j in np.flatnonzero(best_w > 0.5):
        labels[int(j)] = divmod(int(best[j]), cutoffs.n_a)
        overlaps[int(j)] = float(best_w[j])
    return LabeledSpectrum(energies=energies, labels=labels, overlaps=overlaps, cutoffs=cutoffs)


def extract_numeric_params(spec, reference=None):
    """Read mode frequencies, anharmonicities and cross-Kerr off a spectrum.

    ``chi_qa = (E_11 - E_10 - E_01 + E_00) / 2`` because the coupling term is
    ``2 chi_qa q^dag q a^dag a``.  If a ``reference`` spectrum (other cutoffs)
    is given, the absolute differences are stored as the convergence estimate.
    """
    E = spec.energy
    E00 = E(0, 0)
    E10, E01, E11 = E(1, 0), E(0, 1), E(1, 1)
    E20, E02 = E(2, 0), E(0, 2)
    try:
        E30 = E(3, 0)
    except ExtractionError:
        E30 = np.nan
    omega_q = E10 - E00
    omega_a = E01 - E00
    params = dict(
        omega_q=omega_q,
        omega_a=omega_a,
        alpha_q=(E20 - E10) - omega_q,
        alpha_a=(E02 - E01) - omega_a,
        chi_qa=0.5 * (E11 - E10 - E01 + E00),
        omega_13=E30 - E10,
    )
    convergence = {}
    if reference is not None:
        ref = extract_numeric_params(reference)
        convergence = {key: abs(val - getattr(ref, key)) for key, val in params.items()}
    return NumericModeParams(**params, convergence=convergence)


def numeric_mode_params(circuit, cutoffs=FockCutoffs(), check_convergence=True):
    """Diagonalize at ``cutoffs`` (and at doubled cutoffs) and extract parameters."""
    spec = diagonalize_and_label(build_hamiltonian(circuit, cutoffs), cutoffs)
    reference = None
    if check_convergence:
        big = cutoffs.doubled()
        reference = diagonalize_and_label(build_hamiltonian(circuit, big), big)
    return extract_numeric_params(spec, reference)
