"""Single-shot fidelity and QNDness at the operating point, then a power sweep.

The rate model is calibrated so that the deterministic evaluator
reproduces the published error budget; the Monte-Carlo experiments then
estimate F, P_qnd and their post-selected variants.

    python demos/readout_statistics.py [n_shots]
"""

import sys
from pathlib import Path

import numpy as np

from tmreadout.config import load_config
from tmreadout.readout import fidelity_experiment, qnd_experiment, qnd_sweep, snr_analytic

n_shots = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
cfg = load_config(Path(__file__).parent / "configs" / "current_sample.yaml")
ro = cfg.readout_config()
seed = cfg.seed

snr = snr_analytic(ro.pulse, ro.pol, ro.eta)
print(f"SNR at n = {ro.pulse.n_bar:g}, T_r = {ro.pulse.T_r * 1e9:.0f} ns: {snr:.3f}")
r = ro.rates
print("calibrated per-pulse plateaus:",
      ", ".join(f"{p.plateau:.2e}" for p in (r.induced_10, r.induced_01, r.leak_from_1, r.leak_from_0)))

fid = fidelity_experiment(n_shots, ro, seed, workers=4)
qnd = qnd_experiment(n_shots, ro, seed, workers=4)
np.set_printoptions(precision=5, suppress=True)
print("\nP(label | prep), rows 0, 1, l:\n", fid.P)
print(f"F = {fid.F:.4%}   F_ps = {fid.F_ps:.4%}")
print(f"P_qnd = {qnd.P_qnd:.4%}   P_qnd_ps = {qnd.P_qnd_ps:.4%}")

sw = cfg.section("sweep")
res = qnd_sweep(np.array(sw["T_grid"]), np.array(sw["n_grid"]), ro, sw["n_shots"], seed, workers=4)
print("\n1 - P_qnd (rows: T_r in ns, columns: n_bar)")
print("        " + "".join(f"{n:8.0f}" for n in sw["n_grid"]))
for T, row in zip(sw["T_grid"], res.qnd_error):
    print(f"{T * 1e9:7.0f} " + "".join(f"{e:8.4f}" for e in row))
