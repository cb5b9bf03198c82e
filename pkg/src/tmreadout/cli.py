"""Command-line interface: ``tmreadout COMMAND --config run.yaml [--seed N] [--out DIR]``.

Exit status: 0 ok, 2 configuration error, 3 numerical error, 4 statistics error.
"""

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io
from .config import load_config
from .errors import ConfigError, StatisticsError, TmReadoutError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_STATISTICS, EXIT_INTERRUPTED = 0, 2, 3, 4, 130
STREAM_STARK = 4
COMMANDS = ("derive", "spectrum", "limits", "compare", "simulate", "qnd-sweep", "calibrate", "optimize")


class Run:
    """Per-invocation context: parsed config, seed, output directory, format."""

    def __init__(self, command, args):
        self.command = command
        self.cfg = load_config(args.config)
        self.seed = args.seed if args.seed is not None else self.cfg.seed
        if self.seed is not None and self.seed < 0:
            raise ConfigError("seed: must be a non-negative integer")
        out = args.out or self.cfg.top["output_dir"] or "out"
        self.out = Path(out)
        self.fmt = args.format or self.cfg.top["emit_format"]
        self.workers = max(1, args.workers)
        self.out.mkdir(parents=True, exist_ok=True)

    def require_seed(self):
        if self.seed is None:
            raise ConfigError(f"seed: required for '{self.command}' (config key 'seed' or --seed)")
        return self.seed

    def emit(self, doc):
        doc = dict(doc)
        doc["provenance"] = io.provenance(self.command, self.cfg.raw, self.seed)
        stem = self.out / self.command.replace("-", "_")
        return io.write_document(stem, doc, self.fmt)

    def columns(self, name, columns):
        return io.write_columns(self.out / name, columns)


def _print_table(rows, title=None):
    if title:
        print(title)
    width = max(len(r[0]) for r in rows)
    for name, value, unit in rows:
        v = f"{value:.6g}" if isinstance(value, float) else str(value)
        print(f"  {name:<{width}}  {v:>14} {unit}")


# -- commands --------------------------------------------------------------------


def cmd_derive(run):
    circuit, cavity = run.cfg.circuit(), run.cfg.cavity()
    bare, pol = run.cfg.derived_bare(), run.cfg.derived_polariton()
    rows = [
        ("C_s", circuit.C_s, "F"), ("C_t", circuit.C_t, "F"), ("E_J", circuit.E_J, "Hz"),
        ("L_a", circuit.L_a, "H"), ("omega_c", cavity.omega_c, "Hz"), ("g_ac", cavity.g_ac, "Hz"),
        ("E_Cq", bare.E_Cq, "Hz"), ("E_Ca", bare.E_Ca, "Hz"), ("E_Jq", bare.E_Jq, "Hz"),
        ("E_Jq/E_Cq", bare.E_Jq / bare.E_Cq, ""),
        ("omega_q", bare.omega_q, "Hz"), ("omega_a", bare.omega_a, "Hz"),
        ("alpha_q", bare.alpha_q, "Hz"), ("alpha_a", bare.alpha_a, "Hz"), ("chi_qa", bare.chi_qa, "Hz"),
        ("theta", pol.theta, "rad"), ("omega_l", pol.omega_l, "Hz"), ("omega_u", pol.omega_u, "Hz"),
        ("alpha_l", pol.alpha_l, "Hz"), ("alpha_u", pol.alpha_u, "Hz"),
        ("chi_ql", pol.chi_ql, "Hz"), ("chi_qu", pol.chi_qu, "Hz"), ("chi_ul", pol.chi_ul, "Hz"),
        ("kappa_l", pol.kappa_l, "Hz"), ("kappa_u", pol.kappa_u, "Hz"),
    ]
    _print_table(rows, "derived parameters")
    run.columns("parameters.tsv", {
        "name": [r[0] for r in rows], "value": [float(r[1]) for r in rows], "unit": [r[2] or "-" for r in rows],
    })
    return run.emit({
        "circuit": asdict(circuit), "cavity": asdict(cavity), "bare": asdict(bare), "polariton": asdict(pol),
        "measured": run.cfg.measured(),
    })


def cmd_spectrum(run):
    from .spectrum import FockCutoffs, build_hamiltonian, diagonalize_and_label, extract_numeric_params

    opts = run.cfg.sections.get("spectrum") or {"n_q": 15, "n_a": 15, "check_convergence": True}
    circuit = run.cfg.circuit()
    try:
        cut = FockCutoffs(opts["n_q"], opts["n_a"])
    except TmReadoutError as exc:
        raise ConfigError(f"spectrum: {exc}") from None
    spec = diagonalize_and_label(build_hamiltonian(circuit, cut), cut)
    ref = None
    if opts["check_convergence"]:
        big = cut.doubled()
        ref = diagonalize_and_label(build_hamiltonian(circuit, big), big)
    num = extract_numeric_params(spec, ref)
    bare = run.cfg.derived_bare()
    idx = sorted(spec.labels)
    run.columns("levels.tsv", {
        "index": idx,
        "k": [spec.labels[i][0] for i in idx],
        "n": [spec.labels[i][1] for i in idx],
        "energy": [float(spec.energies[i] - spec.energies[0]) for i in idx],
        "overlap": [spec.overlaps[i] for i in idx],
    })
    keys = ("omega_q", "omega_a", "alpha_q", "alpha_a", "chi_qa")
    _print_table([(k, getattr(num, k), "Hz") for k in keys + ("omega_13",)], "numerical mode parameters")
    return run.emit({
        "cutoffs": {"n_q": cut.n_q, "n_a": cut.n_a},
        "numeric": asdict(num),
        "analytic": {k: getattr(bare, k) for k in keys},
        "relative_difference": {k: (getattr(num, k) - getattr(bare, k)) / abs(getattr(bare, k)) for k in keys},
    })


def _coherence(run):
    from .limits import coherence_budget

    lim = run.cfg.limits_options()
    pairs = (("Q_diel", "T1"), ("temperature", "T2"))
    given = [[lim[k] is not None for k in p] for p in pairs]
    if not any(any(g) for g in given):
        return None
    for p, g in zip(pairs, given):
        if sum(g) != 1:
            raise ConfigError(f"limits.{p[0]}: give exactly one of limits.{p[0]} / limits.{p[1]}")
    cb = coherence_budget(
        run.cfg.bare(), run.cfg.polariton(), Q_diel=lim["Q_diel"], T1_target=lim["T1"],
        temperature=lim["temperature"], T2_target=lim["T2"], phi01_sq=lim["phi01_sq"],
        convention=lim["dephasing_convention"],
    )
    return asdict(cb)


def cmd_limits(run):
    from .limits import equivalent_transverse

    cp = run.cfg.critical_photons()
    lim = run.cfg.limits_options()
    te = equivalent_transverse(run.cfg.bare(), run.cfg.polariton(), run.cfg.cavity().kappa_out, lim["convention"])
    doc = {"critical_photons": {**asdict(cp), "limiting": cp.limiting}, "transverse_equivalent": asdict(te)}
    cb = _coherence(run)
    if cb is not None:
        doc["coherence"] = cb
    _print_table([(k, getattr(cp, k), "photons") for k in ("n_rwa", "n_rwa2", "n_bifurc", "n_lowphi", "n_crit")],
                 "critical photon numbers")
    return run.emit(doc)


def cmd_compare(run):
    from .limits import equivalent_transverse

    cp = run.cfg.critical_photons()
    bare, pol, cav = run.cfg.bare(), run.cfg.polariton(), run.cfg.cavity()
    te = {c: equivalent_transverse(bare, pol, cav.kappa_out, c) for c in ("angular", "cyclic")}
    rows = [
        ("chi_qr", pol.chi_qr, pol.chi_qr),
        ("coupling", cav.g_ac, te["angular"].g_x),
        ("n_crit", cp.n_crit, te["angular"].n_std_crit),
        ("T1_purcell_angular", np.inf, te["angular"].T1_purcell),
        ("T1_purcell_cyclic", np.inf, te["cyclic"].T1_purcell),
    ]
    run.columns("comparison.tsv", {
        "quantity": [r[0] for r in rows],
        "cos_phi": [float(r[1]) for r in rows],
        "transverse_equivalent": [float(r[2]) for r in rows],
    })
    for name, a, b in rows:
        print(f"  {name:<20} {a:>14.6g} {b:>14.6g}")
    return run.emit({
        "cos_phi": {"n_crit": cp.n_crit, "g_ac": cav.g_ac, "chi_qr": pol.chi_qr, "T1_purcell": np.inf},
        "transverse_equivalent": {c: asdict(t) for c, t in te.items()},
        "n_crit_ratio": cp.n_crit / te["angular"].n_std_crit,
    })


def _readout_summary(cfg):
    from .readout import snr_analytic

    r = cfg.rates
    return {
        "snr_analytic": snr_analytic(cfg.pulse, cfg.pol, cfg.eta),
        "plateaus": {
            "induced_10": r.induced_10.plateau, "induced_01": r.induced_01.plateau,
            "leak_1": r.leak_from_1.plateau, "leak_0": r.leak_from_0.plateau,
        },
        "n_crit_step": r.induced_10.n_crit,
        "gamma_down": r.gamma_down_intrinsic,
        "gamma_up": r.gamma_up_thermal,
    }


def cmd_simulate(run, n_shots=None):
    from .readout import fidelity_experiment, qnd_experiment

    seed = run.require_seed()
    ro = run.cfg.readout_options()
    n = n_shots or ro["n_shots"]
    cfg = run.cfg.readout_config()
    fid = fidelity_experiment(n, cfg, seed, workers=run.workers, record_shots=ro["record_shots"])
    qnd = qnd_experiment(n, cfg, seed, workers=run.workers)
    if fid.shots is not None:
        io.write_shots(run.out / "shots.tsv", fid.shots)
    print(f"  F = {fid.F:.5f}   F_ps = {fid.F_ps:.5f}   P_qnd = {qnd.P_qnd:.5f}   P_qnd_ps = {qnd.P_qnd_ps:.5f}")
    return run.emit({
        "n_shots": n,
        "model": _readout_summary(cfg),
        "fidelity": {
            "F": fid.F, "F_ps": fid.F_ps, "P": fid.P, "counts": fid.counts,
            "thresholds": fid.thresholds.as_dict(), "preselect_thresholds": fid.preselect_thresholds.as_dict(),
        },
        "qnd": {
            "P_qnd": qnd.P_qnd, "P_qnd_ps": qnd.P_qnd_ps, "joint": qnd.joint, "counts": qnd.counts,
            "thresholds": qnd.thresholds.as_dict(),
        },
    })


def cmd_qnd_sweep(run, n_shots=None):
    from .readout import qnd_sweep

    seed = run.require_seed()
    sw = run.cfg.section("sweep")
    n = n_shots or sw["n_shots"]
    cfg = run.cfg.readout_config()
    T_grid, n_grid = np.array(sw["T_grid"]), np.array(sw["n_grid"])
    done = {}

    def flush(complete):
        keys = sorted(done)
        run.columns("sweep.tsv", {
            "i": [k[0] for k in keys], "j": [k[1] for k in keys],
            "T_r": [T_grid[k[0]] for k in keys], "n_bar": [n_grid[k[1]] for k in keys],
            "qnd_error": [1.0 - done[k].P_qnd for k in keys],
            "qnd_ps_error": [1.0 - done[k].P_qnd_ps for k in keys],
        })
        return run.emit({
            "complete": complete, "cells_done": len(done), "cells_total": int(T_grid.size * n_grid.size),
            "n_shots_per_cell": n, "T_grid": T_grid, "n_grid": n_grid, "model": _readout_summary(cfg),
        })

    def on_cell(i, j, rep):
        done[(i, j)] = rep
        flush(False)

    try:
        qnd_sweep(T_grid, n_grid, cfg, n, seed, workers=run.workers, on_cell=on_cell)
    except KeyboardInterrupt:
        flush(False)
        raise
    return flush(True)


def cmd_calibrate(run):
    from .calibration import fit_lines, photons_from_shift, synth_stark_map, write_stark_map
    from .readout.engine import make_rng

    seed = run.require_seed()
    o = run.cfg.calibration_options()
    omega_q = o["omega_q"] if o["omega_q"] is not None else run.cfg.bare().omega_q
    chi = o["chi_qr"] if o["chi_qr"] is not None else run.cfg.polariton().chi_qr
    if o["n_powers"] < 3 or o["power_max"] <= 0 or o["probe_step"] <= 0 or o["probe_max"] <= o["probe_min"]:
        raise ConfigError("calibration: need n_powers >= 3, power_max > 0 and an increasing probe range")
    powers = np.linspace(0.0, o["power_max"], o["n_powers"])
    probes = np.arange(o["probe_min"], o["probe_max"] + 0.5 * o["probe_step"], o["probe_step"])
    try:
        smap = synth_stark_map(
            omega_q, chi, powers, probes, o["linewidth"], o["noise_level"], make_rng(seed, STREAM_STARK),
            photons_per_watt=o["photons_per_watt"], amplitude=o["amplitude"],
            anticrossing=None if o["anticrossing"] is None else tuple(o["anticrossing"]),
        )
    except TmReadoutError as exc:
        raise ConfigError(f"calibration: {exc}") from None
    fits = fit_lines(smap, o["redchi_max"])
    cal = photons_from_shift(powers, fits, chi)
    write_stark_map(run.out / "stark_map.tsv", smap)
    run.columns("line_fits.tsv", {
        "power": powers,
        "center": [f.center for f in fits], "center_err": [f.center_err for f in fits],
        "width": [f.width for f in fits], "redchi": [f.redchi for f in fits],
        "flagged": [int(f.flagged) for f in fits],
    })
    doc = {
        "slope_photons_per_watt": cal.slope, "intercept_photons": cal.intercept,
        "shift_slope_hz_per_watt": cal.shift_slope, "omega_q0": cal.omega_q0, "chi_qr": chi,
        "n_points": cal.n_points, "power_range": list(cal.power_range),
        "flagged_rows": [{"power": float(p), "reason": f.reason} for p, f in zip(powers, fits) if f.flagged],
        "truth_photons_per_watt": o["photons_per_watt"],
    }
    if run.cfg.has("pulse"):
        nb = run.cfg.section("pulse")["n_bar"]
        p = cal.power_for(nb)
        doc["readout_point"] = {
            "n_bar": nb, "power": p, "stark_shift": cal.shift_at(nb),
            "extrapolated": bool(cal.photons(p)[1]),
        }
    print(f"  slope = {cal.slope:.6g} photons/W from {cal.n_points} rows ({len(doc['flagged_rows'])} flagged)")
    return run.emit(doc)


def cmd_optimize(run):
    from .optimizer import PARAM_NAMES, evaluate_reward, gradient_ascent

    circuit, cavity = run.cfg.circuit(), run.cfg.cavity()
    rcfg = run.cfg.reward_config() if run.cfg.has("reward") else None
    state = gradient_ascent(circuit, cavity, rcfg, run.cfg.ascent_options())
    traj = np.array(state.trajectory, dtype=float)
    cols = {"step": traj[:, 0].astype(int), "reward": traj[:, 1]}
    cols.update({name: traj[:, 2 + i] for i, name in enumerate(PARAM_NAMES)})
    cols["grad_norm"] = traj[:, -1]
    run.columns("trajectory.tsv", cols)
    start, end = evaluate_reward(circuit, cavity, rcfg), evaluate_reward(state.params, cavity, rcfg)
    print(f"  reward {start.value:.6g} -> {end.value:.6g} in {state.step} steps (converged: {state.converged})")
    return run.emit({
        "initial": {"params": asdict(circuit), "reward": start.value, "factors": start.factors, "quantities": start.quantities},
        "final": {"params": asdict(state.params), "reward": end.value, "factors": end.factors, "quantities": end.quantities},
        "steps": state.step, "converged": state.converged, "gradient": state.gradient,
    })


HANDLERS = {
    "derive": cmd_derive, "spectrum": cmd_spectrum, "limits": cmd_limits, "compare": cmd_compare,
    "simulate": cmd_simulate, "qnd-sweep": cmd_qnd_sweep, "calibrate": cmd_calibrate, "optimize": cmd_optimize,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--out", help="output directory (default: config output_dir or ./out)")
    common.add_argument("--format", choices=io.FORMATS, help="summary document format")
    common.add_argument("--workers", type=int, default=1, help="worker threads for shot batches")
    parser = argparse.ArgumentParser(prog="tmreadout", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("simulate", "qnd-sweep"):
            p.add_argument("--shots", type=int, help="shots per preparation (per cell for qnd-sweep)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run = Run(args.command, args)
        handler = HANDLERS[args.command]
        if args.command in ("simulate", "qnd-sweep"):
            if args.shots is not None and args.shots < 1:
                raise ConfigError("--shots: must be >= 1")
            handler(run, args.shots)
        else:
            handler(run)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StatisticsError as exc:
        print(f"statistics error: {exc}", file=sys.stderr)
        return EXIT_STATISTICS
    except (TmReadoutError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KeyboardInterrupt:
        print("interrupted; partial results flushed", file=sys.stderr)
        return EXIT_INTERRUPTED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
