"""Photon-number limits of the cos(phi) readout and the transverse comparison.

    python demos/photon_limits.py
"""

from pathlib import Path

from tmreadout.config import load_config
from tmreadout.limits import coherence_budget, equivalent_transverse

cfg = load_config(Path(__file__).parent / "configs" / "current_sample.yaml")
bare, pol = cfg.bare(), cfg.polariton()

cp = cfg.critical_photons()
print("critical photon numbers")
for key in ("n_rwa", "n_rwa2", "n_bifurc", "n_lowphi"):
    print(f"  {key:9s} {getattr(cp, key):10.1f}")
print(f"  limiting: {cp.limiting} -> n_crit = {cp.n_crit:.1f}")

# a transverse coupler with the same dispersive shift and detuning
for convention in ("angular", "cyclic"):
    te = equivalent_transverse(bare, pol, cfg.cavity().kappa_out, convention)
    print(f"\ntransverse equivalent ({convention} rates)")
    print(f"  g_x       {te.g_x / 1e6:8.1f} MHz")
    print(f"  n_std     {te.n_std_crit:8.1f}")
    print(f"  T1_Purcell {te.T1_purcell * 1e6:7.3f} us")

# invert the measured coherence times for the loss tangent and the effective temperature
cb = coherence_budget(bare, pol, T1_target=124.5e-6, T2_target=22.6e-6, convention="cyclic")
print(f"\nQ_diel from T1: {cb.Q_diel:.3g}")
print(f"T_eff from T2 (thermal photons in l and u): {cb.T_eff * 1e3:.1f} mK")
print(f"  n_th(l) = {cb.n_th_l:.2e}, n_th(u) = {cb.n_th_r:.2e}")
