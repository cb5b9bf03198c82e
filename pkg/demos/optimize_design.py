"""Gradient ascent on the design reward, starting from the previous sample.

    python demos/optimize_design.py
"""

from pathlib import Path

from tmreadout.circuit import derive_bare_modes
from tmreadout.config import load_config
from tmreadout.optimizer import evaluate_reward, gradient_ascent

cfg = load_config(Path(__file__).parent / "configs" / "previous_sample.yaml")
circuit, cavity = cfg.circuit(), cfg.cavity()

state = gradient_ascent(circuit, cavity, opts=cfg.ascent_options())
start, end = evaluate_reward(circuit, cavity), evaluate_reward(state.params, cavity)
print(f"reward {start.value:.4g} -> {end.value:.4g} after {state.step} steps (converged: {state.converged})")

print("\nfactor           start      end")
for k in start.factors:
    print(f"  {k:12s} {start.factors[k]:8.4f} {end.factors[k]:8.4f}")

before, after = derive_bare_modes(circuit), derive_bare_modes(state.params)
print("\n            start        end")
for key, scale, unit in (("omega_q", 1e-9, "GHz"), ("alpha_q", 1e-6, "MHz"), ("alpha_a", 1e-6, "MHz"),
                         ("chi_qa", 1e-6, "MHz")):
    print(f"  {key:8s} {getattr(before, key) * scale:10.4f} {getattr(after, key) * scale:10.4f} {unit}")
for name in ("E_J", "C_s", "C_t", "L_a0"):
    print(f"  {name:8s} {getattr(circuit, name):10.4g} {getattr(state.params, name):10.4g}")
