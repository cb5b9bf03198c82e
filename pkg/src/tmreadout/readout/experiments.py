"""Fidelity and QNDness experiments on top of the jump-process engine.

Fidelity sequence: thermal state, optional pi pulse, pre-selection pulse,
depletion wait, readout pulse.  Shots whose pre-selection label differs from
the intended preparation are discarded.

QNDness sequence: thermal state, optional pi pulse, two identical readout
pulses separated by the depletion wait.  Statistics with and without the pi
pulse are merged.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import StatisticsError
from .budget import ErrorBudget, calibrate_plateaus, joint_label_probabilities
from .classify import (
    LABEL_0,
    LABEL_1,
    LABEL_L,
    classify,
    fit_thresholds,
    thresholds_from_means,
)
from .engine import DEFAULT_BATCH, Measurement, Window, make_rng, run_batches, sample_sequence
from .pulse import ReadoutPulse, check_depletion, pointer_means, snr_analytic
from .rates import RateModel, thermal_populations

__all__ = [
    "ReadoutConfig",
    "ShotRecord",
    "FidelityReport",
    "QndReport",
    "SweepResult",
    "measurement_for",
    "calibrate_thresholds",
    "simulate_shot",
    "fidelity_experiment",
    "qnd_experiment",
    "qnd_sweep",
    "expected_fidelity",
    "expected_qnd",
    "calibrate_rate_model",
]

STREAM_CAL, STREAM_FID, STREAM_QND = 1, 2, 3
PI_SWAP = np.array([1, 0, 2])


@dataclass(frozen=True)
class ReadoutConfig:
    """Everything the readout experiments need.

    ``pre_pulse=None`` reuses the readout pulse for pre-selection.
    ``preselect_margin`` is in units of the pre-pulse noise standard deviation.
    """

    pol: object
    pulse: ReadoutPulse
    rates: RateModel = field(default_factory=RateModel)
    eta: float = 0.2
    omega_q: float = 0.0
    alpha_q: float = 0.0
    T_eff: float = 0.0
    pre_pulse: ReadoutPulse = None
    preselect_margin: float = 0.0
    n_calibration: int = 20000
    batch_size: int = DEFAULT_BATCH

    @property
    def preselection_pulse(self):
        return self.pulse if self.pre_pulse is None else self.pre_pulse

    def initial_populations(self, pi_pulse=False):
        p = thermal_populations(self.omega_q, self.alpha_q, self.T_eff)
        return p[PI_SWAP] if pi_pulse else p


@dataclass
class ShotRecord:
    iq: complex
    true_path: list
    prep: int


@dataclass
class FidelityReport:
    F: float
    F_ps: float
    P: np.ndarray  # P[j, i] = Prob(label i | prepared j), j, i over (0, 1, l)
    counts: np.ndarray
    thresholds: object
    preselect_thresholds: object = None
    n_shots: int = 0
    shots: dict = None

    @property
    def binary_errors(self):
        """``(P(1|0), P(0|1))`` with leakage counted as 1."""
        return float(self.P[0, 1] + self.P[0, 2]), float(self.P[1, 0])


@dataclass
class QndReport:
    P_qnd: float
    P_qnd_ps: float
    joint: np.ndarray  # Prob(m1, m2) over (0, 1, l)^2
    counts: np.ndarray = None
    thresholds: object = None
    n_shots: int = 0


@dataclass
class SweepResult:
    T_grid: np.ndarray
    n_grid: np.ndarray
    qnd_error: np.ndarray  # 1 - P_qnd, shape (len(T_grid), len(n_grid))
    qnd_ps_error: np.ndarray


def measurement_for(pulse, pol, eta, thresholds=None, margin=0.0):
    """Pointer means and noise chosen so assignment error is ``erfc(SNR/2)/2``."""
    means = pointer_means(pulse, pol)
    snr = snr_analytic(pulse, pol, eta)
    sep = abs(means[1] - means[0])
    sigma = sep / (np.sqrt(2.0) * snr) if snr > 0 else sep * 1e12
    return Measurement(means=means, sigma=float(sigma), thresholds=thresholds, margin=margin * sigma)


def _windows(cfg, first, second, thresholds_first, thresholds_second, margin_first=0.0):
    rates = cfg.rates
    m1 = measurement_for(first, cfg.pol, cfg.eta, thresholds_first, margin_first)
    m2 = measurement_for(second, cfg.pol, cfg.eta, thresholds_second)
    return [
        Window(first.T_r, rates.pulse_matrix(first.n_bar, first.T_r), m1),
        Window(second.ring_gap, rates.intrinsic_matrix()),
        Window(second.T_r, rates.pulse_matrix(second.n_bar, second.T_r), m2),
    ]


def calibrate_thresholds(cfg, pulse, seed, sub=0):
    """Fit classifier thresholds on shots prepared in 0, 1 and 2 (one pulse each)."""
    meas = measurement_for(pulse, cfg.pol, cfg.eta)
    window = [Window(pulse.T_r, cfg.rates.pulse_matrix(pulse.n_bar, pulse.T_r), meas)]
    iq = {}
    for level in range(3):
        rng = make_rng(seed, STREAM_CAL, sub, level)
        sample = sample_sequence(rng, np.full(cfg.n_calibration, level), window)
        iq[level] = sample.iq[:, 0]
    return fit_thresholds(iq)


def simulate_shot(prep_state, pulse, pol, rates, eta, rng):
    """One readout of a qubit prepared in ``prep_state`` with its true jump path."""
    meas = measurement_for(pulse, pol, eta)
    window = [Window(pulse.T_r, rates.pulse_matrix(pulse.n_bar, pulse.T_r), meas)]
    sample = sample_sequence(rng, np.array([prep_state]), window, record_paths=True)
    path = [(0.0, int(prep_state))] + [(t, s) for _, t, s in sample.paths[0]]
    return ShotRecord(iq=complex(sample.iq[0, 0]), true_path=path, prep=int(prep_state))


def _sample_initial(rng, p, n):
    return rng.choice(3, size=n, p=p / p.sum())


def _rows_to_P(counts):
    """Row-normalize; an empty leakage row (no thermal l population) becomes NaN."""
    totals = counts.sum(axis=1, keepdims=True).astype(float)
    if np.any(totals[:2] == 0):
        raise StatisticsError("a preparation has no shots left after pre-selection")
    totals[totals == 0] = np.nan
    return counts / totals


def fidelity_experiment(n_shots, cfg, seed, workers=1, record_shots=False, cell=0):
    """Pre-selected single-shot fidelity with a 3x3 conditional matrix.

    ``n_shots`` sequences are run for each preparation (0, 1 and the thermal
    leakage population, the latter pre-selected on label l).
    """
    check_depletion(cfg.pulse.ring_gap, cfg.pol)
    pre = cfg.preselection_pulse
    th_pre = calibrate_thresholds(cfg, pre, seed, sub=2 * cell)
    th = calibrate_thresholds(cfg, cfg.pulse, seed, sub=2 * cell + 1)
    windows = _windows(cfg, pre, cfg.pulse, th_pre, th, cfg.preselect_margin)
    pre_m, ro_m = windows[0].measurement, windows[2].measurement

    counts = np.zeros((3, 3), dtype=np.int64)
    shots = {"prep": [], "I": [], "Q": [], "label": [], "jump_count": []} if record_shots else None
    for prep in (0, 1, 2):
        p_init = cfg.initial_populations(pi_pulse=(prep == 1))

        def batch(b, start, stop, prep=prep, p_init=p_init):
            rng = make_rng(seed, STREAM_FID, cell, prep, b)
            init = _sample_initial(rng, p_init, stop - start)
            sample = sample_sequence(rng, init, windows)
            pre_lab = classify(sample.iq[:, 0], pre_m.thresholds, pre_m.margin)
            lab = classify(sample.iq[:, 1], ro_m.thresholds)
            keep = pre_lab == prep
            return keep, lab, sample

        for keep, lab, sample in run_batches(batch, n_shots, cfg.batch_size, workers):
            counts[prep] += np.bincount(lab[keep], minlength=3)[:3]
            if record_shots and prep < 2:
                shots["prep"].append(np.full(keep.sum(), prep, dtype=np.int8))
                shots["I"].append(sample.iq[keep, 1].real)
                shots["Q"].append(sample.iq[keep, 1].imag)
                shots["label"].append(lab[keep])
                shots["jump_count"].append(sample.jumps[keep, 1])
    if record_shots:
        shots = {k: np.concatenate(v) for k, v in shots.items()}
    P = _rows_to_P(counts)
    return _fidelity_report(P, counts, th, th_pre, n_shots, shots)


def _fidelity_report(P, counts, th, th_pre, n_shots, shots=None):
    F = 1.0 - 0.5 * ((P[0, 1] + P[0, 2]) + P[1, 0])
    denom = 2.0 - P[0, 2] - P[1, 2]
    F_ps = (P[1, 1] + P[0, 0]) / denom
    return FidelityReport(
        F=float(F),
        F_ps=float(F_ps),
        P=P,
        counts=counts,
        thresholds=th,
        preselect_thresholds=th_pre,
        n_shots=n_shots,
        shots=shots,
    )


def _qnd_from_joint(joint):
    binary = joint[0, 0] + joint[1:, 1:].sum()
    denom = 1.0 - joint[2, :].sum()
    if denom <= 0:
        raise StatisticsError("every shot was post-selected out (first label l)")
    ps = (joint[0, 0] + joint[1, 1]) / denom
    return float(binary), float(ps)


def qnd_experiment(n_shots, cfg, seed, workers=1, cell=0):
    """Two back-to-back readouts; ``n_shots`` sequences per preparation (with/without pi)."""
    check_depletion(cfg.pulse.ring_gap, cfg.pol)
    th = calibrate_thresholds(cfg, cfg.pulse, seed, sub=2 * cell + 1)
    windows = _windows(cfg, cfg.pulse, cfg.pulse, th, th)
    counts = np.zeros((3, 3), dtype=np.int64)
    for prep in (0, 1):
        p_init = cfg.initial_populations(pi_pulse=(prep == 1))

        def batch(b, start, stop, prep=prep, p_init=p_init):
            rng = make_rng(seed, STREAM_QND, cell, prep, b)
            init = _sample_initial(rng, p_init, stop - start)
            sample = sample_sequence(rng, init, windows)
            m1 = classify(sample.iq[:, 0], th)
            m2 = classify(sample.iq[:, 1], th)
            return np.bincount(3 * m1.astype(np.int64) + m2, minlength=9).reshape(3, 3)

        for c in run_batches(batch, n_shots, cfg.batch_size, workers):
            counts += c
    joint = counts / counts.sum()
    P_qnd, P_ps = _qnd_from_joint(joint)
    return QndReport(P_qnd=P_qnd, P_qnd_ps=P_ps, joint=joint, counts=counts, thresholds=th, n_shots=n_shots)


def qnd_sweep(T_grid, n_grid, cfg, n_shots, seed, workers=1, on_cell=None):
    """``1 - P_qnd`` over a (T_r, n_bar) grid; cell ``(i, j)`` uses stream ``i * len(n_grid) + j``.

    ``on_cell(i, j, report)`` is called after each cell (used to flush partial results).
    """
    T_grid = np.asarray(T_grid, dtype=float)
    n_grid = np.asarray(n_grid, dtype=float)
    err = np.full((T_grid.size, n_grid.size), np.nan)
    err_ps = np.full_like(err, np.nan)
    for i, T in enumerate(T_grid):
        for j, n in enumerate(n_grid):
            pulse = replace(cfg.pulse, T_r=float(T), n_bar=float(n))
            rep = qnd_experiment(n_shots, replace(cfg, pulse=pulse), seed, workers, cell=i * n_grid.size + j)
            err[i, j] = 1.0 - rep.P_qnd
            err_ps[i, j] = 1.0 - rep.P_qnd_ps
            if on_cell is not None:
                on_cell(i, j, rep)
    return SweepResult(T_grid=T_grid, n_grid=n_grid, qnd_error=err, qnd_ps_error=err_ps)


# -- deterministic counterparts ------------------------------------------------------


def _model_thresholds(cfg, pulse):
    return thresholds_from_means(pointer_means(pulse, cfg.pol))


def expected_fidelity(cfg):
    """Single-jump evaluation of :func:`fidelity_experiment` with bisector thresholds."""
    pre = cfg.preselection_pulse
    th_pre = _model_thresholds(cfg, pre)
    th = _model_thresholds(cfg, cfg.pulse)
    windows = _windows(cfg, pre, cfg.pulse, th_pre, th, cfg.preselect_margin)
    P = np.zeros((3, 3))
    for prep in (0, 1, 2):
        joint = joint_label_probabilities(cfg.initial_populations(pi_pulse=(prep == 1)), windows)
        row = joint[prep, :3]
        P[prep] = row / row.sum() if row.sum() > 0 else np.nan
    return _fidelity_report(P, None, th, th_pre, 0)


def expected_qnd(cfg):
    """Single-jump evaluation of :func:`qnd_experiment` with bisector thresholds."""
    th = _model_thresholds(cfg, cfg.pulse)
    windows = _windows(cfg, cfg.pulse, cfg.pulse, th, th)
    joint = np.zeros((3, 3))
    for prep in (0, 1):
        j = joint_label_probabilities(cfg.initial_populations(pi_pulse=(prep == 1)), windows)
        joint += 0.5 * j[:3, :3]
    joint /= joint.sum()
    P_qnd, P_ps = _qnd_from_joint(joint)
    return QndReport(P_qnd=P_qnd, P_qnd_ps=P_ps, joint=joint, thresholds=th)


def calibrate_rate_model(cfg, budget=ErrorBudget()):
    """Set the four induced plateaus so the fidelity experiment reproduces ``budget``.

    Returns a config carrying the calibrated :class:`RateModel`.
    """

    def evaluate(x):
        rep = expected_fidelity(replace(cfg, rates=cfg.rates.with_plateaus(*x)))
        p10, p01 = rep.binary_errors
        out = (p01, p10, rep.P[1, 2], rep.P[0, 2])
        if not np.all(np.isfinite(out)):
            raise StatisticsError("pre-selection keeps no population of 0 or 1; the budget cannot be matched")
        return out

    targets = (budget.p0_given_1, budget.p1_given_0, budget.leak_1, budget.leak_0)
    x0 = (2 * budget.induced_10, 2 * budget.induced_01, 2 * budget.leak_1, 2 * budget.leak_0)
    x = calibrate_plateaus(evaluate, targets, x0)
    return replace(cfg, rates=cfg.rates.with_plateaus(*x))
