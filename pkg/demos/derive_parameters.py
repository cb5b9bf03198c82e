"""Current sample: from circuit elements to the polariton readout mode.

Runs the analytic fourth-order derivation, hybridizes the ancilla with the
cavity, and cross-checks the nonlinearities against a Fock-space
diagonalization.

    python demos/derive_parameters.py
"""

from pathlib import Path

from tmreadout.config import load_config
from tmreadout.spectrum import FockCutoffs, numeric_mode_params

cfg = load_config(Path(__file__).parent / "configs" / "current_sample.yaml")
bare, pol = cfg.derived_bare(), cfg.derived_polariton()
measured = cfg.measured()

print("bare modes (analytic)")
for key in ("omega_q", "omega_a", "alpha_q", "alpha_a", "chi_qa"):
    print(f"  {key:8s} {getattr(bare, key) / 1e6:12.4f} MHz")
print(f"  E_Jq/E_Cq {bare.E_Jq / bare.E_Cq:.1f}")

print("\npolaritons: derived vs measured")
for key in ("theta", "omega_l", "omega_u", "alpha_u", "chi_ql", "chi_qu"):
    d = getattr(pol, key)
    m = measured.get(key)
    scale, unit = (1.0, "rad") if key == "theta" else (1e-6, "MHz")
    line = f"  {key:8s} {d * scale:12.5f}"
    if m is not None:
        line += f"   measured {m * scale:12.5f}   ({(d - m) / abs(m):+.1%})"
    print(line, unit)

# exact spectrum of the two-mode Hamiltonian; the doubled cutoff checks convergence
num = numeric_mode_params(cfg.circuit(), FockCutoffs(15, 15))
print("\nnumerical diagonalization at (15, 15)")
for key in ("omega_q", "alpha_q", "chi_qa", "omega_13"):
    print(f"  {key:8s} {getattr(num, key) / 1e6:12.3f} MHz")
print(f"  omega_q shift on doubling the cutoff: {num.convergence['omega_q']:.2g} Hz")
