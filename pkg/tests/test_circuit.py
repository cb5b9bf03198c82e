import math

import numpy as np
import pytest

import oracles
from tmreadout.circuit import (
    CavityParams,
    CircuitParams,
    derive_bare_modes,
    flux_tuned_inductance,
    hybridize,
    infer_bare_losses,
    polariton_losses,
)
from tmreadout.errors import DegeneracyError, DomainError
from tmreadout.units import PHI0


def test_charging_and_josephson_energies_match_oracle(circuit):
    bare = derive_bare_modes(circuit)
    E_Cq, E_Ca = oracles.charging_energies(oracles.C_S, oracles.C_T)
    assert bare.E_Cq == pytest.approx(E_Cq, rel=1e-12)
    assert bare.E_Ca == pytest.approx(E_Ca, rel=1e-12)
    assert bare.E_Jq == pytest.approx(2 * oracles.E_J)
    assert bare.L_J == pytest.approx(oracles.josephson_inductance(oracles.E_J), rel=1e-12)


def test_bare_modes_match_oracle(circuit):
    bare = derive_bare_modes(circuit)
    ref = oracles.bare_modes(oracles.C_S, oracles.C_T, oracles.E_J, oracles.L_A)
    for key in ("omega_q", "omega_a", "alpha_q", "alpha_a", "chi_qa"):
        assert getattr(bare, key) == pytest.approx(ref[key], rel=1e-12), key
    assert bare.dilution == pytest.approx(ref["D"], rel=1e-12)


def test_bare_mode_reference_values(circuit):
    # hand evaluation of the fourth-order expressions
    bare = derive_bare_modes(circuit)
    assert bare.E_Cq == pytest.approx(73.372e6, rel=1e-4)
    assert bare.chi_qa == pytest.approx(-9.7233e6, rel=1e-4)
    assert bare.alpha_a == pytest.approx(-1.2885e6, rel=1e-4)
    assert bare.omega_02 == pytest.approx(2 * bare.omega_q + bare.alpha_q)
    assert bare.omega_13 == pytest.approx(2 * bare.omega_q + 3 * bare.alpha_q)


def test_hybridization_matches_two_mode_eigenproblem(circuit, cavity):
    bare = derive_bare_modes(circuit)
    pol = hybridize(bare, cavity)
    w_l, w_u, theta = oracles.polaritons_by_eig(bare.omega_a, cavity.omega_c, cavity.g_ac)
    assert pol.omega_l == pytest.approx(w_l, rel=1e-12)
    assert pol.omega_u == pytest.approx(w_u, rel=1e-12)
    assert pol.theta == pytest.approx(theta, rel=1e-10)
    assert pol.omega_u - pol.omega_l == pytest.approx(
        math.hypot(cavity.omega_c - bare.omega_a, 2 * cavity.g_ac), rel=1e-12
    )


def test_polariton_inheritance_of_nonlinearity(circuit, cavity):
    bare = derive_bare_modes(circuit)
    pol = hybridize(bare, cavity)
    s2, c2 = math.sin(pol.theta) ** 2, math.cos(pol.theta) ** 2
    assert pol.chi_qu == pytest.approx(s2 * bare.chi_qa)
    assert pol.chi_ql == pytest.approx(c2 * bare.chi_qa)
    assert pol.chi_qu + pol.chi_ql == pytest.approx(bare.chi_qa)
    assert pol.alpha_u == pytest.approx(s2 * s2 * bare.alpha_a)
    assert pol.omega_r == pol.omega_u and pol.chi_qr == pol.chi_qu and pol.kappa_r == pol.kappa_u


def test_zero_coupling_leaves_modes_bare(circuit):
    bare = derive_bare_modes(circuit)
    pol = hybridize(bare, CavityParams(omega_c=7.23e9, g_ac=0.0))
    assert pol.theta == 0.0
    assert pol.omega_l == pytest.approx(bare.omega_a)
    assert pol.omega_u == pytest.approx(7.23e9)
    assert pol.chi_qu == 0.0


def test_resonant_ancilla_gives_equal_mixing(circuit):
    bare = derive_bare_modes(circuit)
    pol = hybridize(bare, CavityParams(omega_c=bare.omega_a, g_ac=100e6))
    assert pol.theta == pytest.approx(math.pi / 4)
    assert pol.omega_u - pol.omega_l == pytest.approx(200e6)


def test_mixing_branch_for_ancilla_above_cavity(circuit):
    bare = derive_bare_modes(circuit)
    pol = hybridize(bare, CavityParams(omega_c=bare.omega_a - 1e9, g_ac=224e6))
    assert pol.omega_u > pol.omega_l
    assert pol.theta > math.pi / 4


def test_flux_tuning():
    assert flux_tuned_inductance(3.85e-9, 0.0) == 3.85e-9
    L = flux_tuned_inductance(3.85e-9, 2 * PHI0, A_ratio=28.0)
    assert L == pytest.approx(3.85e-9 / abs(math.cos(2 * math.pi / 28.0)))
    with pytest.raises(DomainError):
        flux_tuned_inductance(3.85e-9, 14 * PHI0, A_ratio=28.0)


@pytest.mark.parametrize("field", ["C_s", "C_t", "E_J", "L_a0"])
def test_nonpositive_elements_rejected(field):
    values = dict(C_s=132e-15, C_t=96.6e-15, E_J=3.84e9, L_a0=3.85e-9)
    values[field] = 0.0
    with pytest.raises(DomainError, match=field):
        CircuitParams(**values)


def test_loss_mixing_round_trip():
    theta = 0.273
    kl, ku = polariton_losses(19.18e6, 1.56e6, theta)
    assert kl == pytest.approx(2.84e6, rel=2e-3)
    assert ku == pytest.approx(17.9e6, rel=2e-3)
    kc, ka = infer_bare_losses(kl, ku, theta)
    assert (kc, ka) == pytest.approx((19.18e6, 1.56e6), rel=1e-12)
    with pytest.raises(DegeneracyError):
        infer_bare_losses(1e6, 1e6, math.pi / 4)


def test_negative_loss_rejected():
    with pytest.raises(DomainError):
        CavityParams(omega_c=7e9, g_ac=1e8, kappa_c=-1.0)
