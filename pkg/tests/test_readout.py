import math
from dataclasses import replace

import numpy as np
import pytest

import oracles
from tmreadout.errors import ConfigError, StatisticsError
from tmreadout.readout import (
    ErrorBudget,
    InducedProfile,
    RateModel,
    ReadoutConfig,
    ReadoutPulse,
    cavity_response,
    classify,
    detailed_balance_up_rate,
    expected_fidelity,
    expected_qnd,
    fidelity_experiment,
    joint_label_probabilities,
    label_probabilities,
    pointer_means,
    qnd_experiment,
    qnd_sweep,
    simulate_shot,
    snr_analytic,
    thermal_populations,
    thresholds_from_means,
)
from tmreadout.readout.engine import Measurement, Window, make_rng, sample_sequence
from tmreadout.readout.pulse import check_depletion, drive_amplitude
from tmreadout.units import TWO_PI

PULSE = ReadoutPulse(n_bar=89, T_r=400e-9)


def ideal_config(pol, eta=1e6, **kw):
    return ReadoutConfig(pol=pol, pulse=PULSE, rates=RateModel.zero(), eta=eta, omega_q=2.0332e9,
                         alpha_q=-73.1e6, T_eff=0.0, n_calibration=5000, **kw)


def binomial_sigma(p, n):
    return math.sqrt(max(p, 1.0 / n) * (1 - p) / n)


# -- cavity field ----------------------------------------------------------------


def test_zero_drive_leaves_cavity_empty(measured_pol):
    resp = cavity_response(0, ReadoutPulse(n_bar=0, T_r=400e-9), measured_pol)
    assert np.all(resp.alpha == 0)


def test_resonant_steady_state_photons(measured_pol):
    resp = cavity_response(0, PULSE, measured_pol)
    kappa = TWO_PI * measured_pol.kappa_r
    assert resp.n_ss == pytest.approx(4 * resp.epsilon**2 / kappa**2, rel=1e-12)
    assert resp.n_ss == pytest.approx(89, rel=1e-12)
    assert abs(resp.alpha[-1]) ** 2 == pytest.approx(89, rel=1e-3)


def test_pointer_separation_angle(measured_pol):
    a0 = cavity_response(0, PULSE, measured_pol)
    a1 = cavity_response(1, PULSE, measured_pol)
    ss0 = a0.alpha[-1]
    ss1 = -1j * a1.epsilon / (TWO_PI * (0.5 * measured_pol.kappa_r + 2j * measured_pol.chi_qr))
    angle = abs(np.angle(ss1 / ss0))
    two_chi, kappa = 2 * abs(measured_pol.chi_qr), measured_pol.kappa_r
    # drive resonant with the |0> pointer
    assert angle == pytest.approx(math.atan(2 * two_chi / kappa), rel=1e-9)
    # drive midway between the two pointers
    mid = replace(PULSE, omega_d=measured_pol.omega_r + measured_pol.chi_qr)
    eps = drive_amplitude(mid, measured_pol)
    lam = [TWO_PI * (0.5 * kappa + 1j * (measured_pol.omega_r + 2 * measured_pol.chi_qr * s - mid.omega_d)) for s in (0, 1)]
    sym = abs(np.angle((-1j * eps / lam[1]) / (-1j * eps / lam[0])))
    assert sym == pytest.approx(2 * math.atan(two_chi / kappa), rel=1e-9)


def test_time_step_limit(measured_pol):
    with pytest.raises(ConfigError):
        cavity_response(0, PULSE, measured_pol, dt=1e-9)


def test_pointer_means_approach_steady_state_for_long_pulses(measured_pol):
    long = ReadoutPulse(n_bar=89, T_r=1e-3)
    means = pointer_means(long, measured_pol)
    assert abs(means[0]) ** 2 == pytest.approx(89, rel=1e-3)


def test_depletion_gap_check(measured_pol):
    need = check_depletion(500e-9, measured_pol)
    assert need == pytest.approx(9 / (TWO_PI * 17.9e6))
    with pytest.raises(ConfigError):
        check_depletion(50e-9, measured_pol)


# -- SNR ------------------------------------------------------------------------------


def test_snr_matches_hand_evaluation(measured_pol):
    snr = snr_analytic(PULSE, measured_pol, 0.2)
    assert snr == pytest.approx(oracles.snr_eq3(0.2, 400e-9, 89, 17.9e6, -0.77e6), rel=1e-12)
    assert snr == pytest.approx(4.851, abs=1e-3)
    assert oracles.assignment_error(snr) <= 5e-4


def test_snr_scalings(measured_pol):
    assert snr_analytic(PULSE, measured_pol, 0.0) == 0.0
    s1 = snr_analytic(PULSE, measured_pol, 0.2)
    s2 = snr_analytic(replace(PULSE, T_r=800e-9), measured_pol, 0.2)
    assert s2 == pytest.approx(math.sqrt(2) * s1)


# -- classifier -----------------------------------------------------------------


def test_classify_pointer_means_and_tie(measured_pol):
    means = pointer_means(PULSE, measured_pol)
    th = thresholds_from_means(means)
    assert classify(means[0], th) == 0
    assert classify(means[1], th) == 1
    assert classify(means[2], th) == 2
    assert classify(0.5 * (means[0] + means[1]), th) == 0


def test_label_probabilities_are_stochastic(measured_pol):
    means = pointer_means(PULSE, measured_pol)
    th = thresholds_from_means(means)
    z = means[0] + np.linspace(-3, 3, 50) * abs(means[1] - means[0])
    p = label_probabilities(z, 0.3 * abs(means[1] - means[0]), th, margin=0.1)
    assert np.allclose(p.sum(axis=-1), 1.0, atol=1e-12)
    assert np.all(p >= -1e-15)


# -- rates ----------------------------------------------------------------------------


def test_thermal_populations_at_effective_temperature():
    p = thermal_populations(2.0332e9, -73.1e6, 0.072)
    assert p.sum() == pytest.approx(1.0)
    assert p == pytest.approx([0.7378, 0.1903, 0.0719], abs=2e-4)
    assert thermal_populations(2e9, -70e6, 0.0).tolist() == [1.0, 0.0, 0.0]


def test_detailed_balance():
    up = detailed_balance_up_rate(1 / 124.5e-6, 2.0332e9, 0.072)
    p = thermal_populations(2.0332e9, -73.1e6, 0.072)
    assert up * 124.5e-6 == pytest.approx(p[1] / p[0], rel=1e-12)


def test_induced_profile_shape():
    prof = InducedProfile(plateau=0.01, step_height=0.2, n_crit=377)
    n = np.linspace(0, 2000, 401)
    p = prof(n)
    assert p[0] == pytest.approx(0.01, abs=1e-5)
    assert np.all(np.diff(p[n >= 377]) >= 0)
    assert prof(377) == pytest.approx(0.01 + 0.1)
    assert prof(5000) <= 1.0
    onset = replace(prof, n_onset=50.0)
    assert onset(0.0) == pytest.approx(float(onset.step(0.0)), abs=1e-15)


def test_pulse_matrix_reproduces_per_pulse_probability():
    rm = RateModel().with_plateaus(0.01, 0.002, 0.0, 0.0)
    Q = rm.pulse_matrix(89, 400e-9)
    assert 1 - math.exp(-Q[1, 0] * 400e-9) == pytest.approx(0.01, rel=1e-12)


# -- engine against closed-form oracles ---------------------------------------------


def _noiseless_meas(pulse, pol):
    means = pointer_means(pulse, pol)
    return Measurement(means=means, sigma=1e-9 * abs(means[1] - means[0]), thresholds=thresholds_from_means(means))


def test_decay_during_readout_matches_oracle(measured_pol):
    T1 = 124.5e-6
    rates = RateModel(gamma_down_intrinsic=1 / T1)
    meas = _noiseless_meas(PULSE, measured_pol)
    window = [Window(PULSE.T_r, rates.pulse_matrix(89, PULSE.T_r), meas)]
    n = 1_000_000
    sample = sample_sequence(make_rng(7, 0), np.ones(n, dtype=int), window)
    p = np.mean(classify(sample.iq[:, 0], meas.thresholds) == 0)
    p_ref = oracles.decay_misassignment(PULSE.T_r, T1)
    assert p_ref == pytest.approx(1.6e-3, rel=0.01)
    assert abs(p - p_ref) < 3 * binomial_sigma(p_ref, n)


def test_two_pulse_relaxation_matches_oracle(measured_pol):
    T1, gap = 5e-6, 500e-9
    rates = RateModel(gamma_down_intrinsic=1 / T1)
    meas = _noiseless_meas(PULSE, measured_pol)
    windows = [
        Window(PULSE.T_r, rates.pulse_matrix(89, PULSE.T_r), meas),
        Window(gap, rates.intrinsic_matrix()),
        Window(PULSE.T_r, rates.pulse_matrix(89, PULSE.T_r), meas),
    ]
    ref = oracles.two_pulse_relaxation_error(PULSE.T_r, gap, T1)
    # deterministic single-jump evaluator is exact here (only one jump possible)
    joint = 0.5 * (joint_label_probabilities([1, 0, 0], windows) + joint_label_probabilities([0, 1, 0], windows))
    assert 1 - joint[0, 0] - joint[1, 1] == pytest.approx(ref, rel=1e-6)
    n = 200_000
    disagree = 0
    for prep in (0, 1):
        s = sample_sequence(make_rng(3, prep), np.full(n, prep), windows)
        disagree += np.sum(classify(s.iq[:, 0], meas.thresholds) != classify(s.iq[:, 1], meas.thresholds))
    p = disagree / (2 * n)
    assert abs(p - ref) < 3 * binomial_sigma(ref, 2 * n)


def test_long_pulse_relaxation_limit_follows_closed_form(measured_pol):
    # the decorrelation at T_r = 10 T1 stays far below one half
    T1 = 1e-6
    pulse = ReadoutPulse(n_bar=89, T_r=10 * T1)
    cfg = replace(ideal_config(measured_pol), pulse=pulse, rates=RateModel(gamma_down_intrinsic=1 / T1))
    rep = expected_qnd(cfg)
    ref = oracles.two_pulse_relaxation_error(pulse.T_r, pulse.ring_gap, T1)
    assert 1 - rep.P_qnd == pytest.approx(ref, rel=1e-3)
    assert 1 - rep.P_qnd < 0.01


def test_simulate_shot_ideal(measured_pol):
    rec = simulate_shot(1, PULSE, measured_pol, RateModel.zero(), 1e12, make_rng(1, 0))
    means = pointer_means(PULSE, measured_pol)
    assert rec.iq == pytest.approx(means[1], rel=1e-5)
    assert rec.true_path == [(0.0, 1)]


def test_simulate_shot_path_is_time_ordered(measured_pol):
    rates = RateModel(gamma_down_intrinsic=1e7, gamma_up_thermal=5e6)
    rec = simulate_shot(1, PULSE, measured_pol, rates, 0.2, make_rng(2, 0))
    times = [t for t, _ in rec.true_path]
    assert times == sorted(times) and times[-1] <= PULSE.T_r
    assert len(rec.true_path) > 2


# -- experiments ---------------------------------------------------------------------


def test_ideal_fidelity_and_qnd_are_perfect(measured_pol):
    cfg = ideal_config(measured_pol)
    fid = fidelity_experiment(20_000, cfg, seed=1)
    assert fid.F == 1.0 and fid.F_ps == 1.0
    qnd = qnd_experiment(20_000, cfg, seed=1)
    assert qnd.P_qnd == 1.0 and qnd.P_qnd_ps == 1.0


def test_conditional_matrix_is_stochastic(calibrated_readout):
    fid = fidelity_experiment(20_000, calibrated_readout, seed=4)
    assert np.allclose(fid.P.sum(axis=1), 1.0, atol=1e-12)
    assert fid.counts.sum(axis=1) == pytest.approx(fid.P.sum(axis=1) * fid.counts.sum(axis=1))
    assert 0 <= fid.F <= 1 and 0 <= fid.F_ps <= 1
    qnd = qnd_experiment(20_000, calibrated_readout, seed=4)
    assert qnd.joint.sum() == pytest.approx(1.0, abs=1e-12)
    assert qnd.counts.sum() == 40_000


def test_empty_preselection_is_a_statistics_error(measured_pol):
    cfg = ideal_config(measured_pol, eta=0.2, preselect_margin=1e6)
    with pytest.raises(StatisticsError):
        fidelity_experiment(1000, cfg, seed=1)


def test_reports_are_deterministic_and_worker_independent(calibrated_readout):
    cfg = replace(calibrated_readout, batch_size=4096)
    a = fidelity_experiment(20_000, cfg, seed=9, workers=1)
    b = fidelity_experiment(20_000, cfg, seed=9, workers=3)
    assert np.array_equal(a.counts, b.counts)
    qa = qnd_experiment(20_000, cfg, seed=9, workers=1)
    qb = qnd_experiment(20_000, cfg, seed=9, workers=4)
    assert np.array_equal(qa.counts, qb.counts)
    c = fidelity_experiment(20_000, cfg, seed=10, workers=1)
    assert not np.array_equal(a.counts, c.counts)


def test_single_cell_sweep_equals_qnd_experiment(calibrated_readout):
    sw = qnd_sweep([400e-9], [89.0], calibrated_readout, 10_000, seed=5)
    rep = qnd_experiment(10_000, calibrated_readout, seed=5)
    assert sw.qnd_error[0, 0] == 1 - rep.P_qnd
    assert sw.qnd_ps_error[0, 0] == 1 - rep.P_qnd_ps


# -- budget calibration ------------------------------------------------------------------


def test_error_budget_arithmetic():
    b = ErrorBudget()
    assert b.total == pytest.approx(7.9e-3)
    assert b.fidelity == pytest.approx(0.9921)
    assert (b.p0_given_1 + b.p1_given_0) / 2 == pytest.approx(b.total)


def test_calibrated_model_reproduces_budget(calibrated_readout):
    rep = expected_fidelity(calibrated_readout)
    b = ErrorBudget()
    p10, p01 = rep.binary_errors
    assert rep.F == pytest.approx(b.fidelity, abs=1e-6)
    assert p01 == pytest.approx(b.p0_given_1, rel=1e-4)
    assert p10 == pytest.approx(b.p1_given_0, rel=1e-4)
    assert rep.P[1, 2] == pytest.approx(b.leak_1, rel=1e-4)
    assert rep.P[0, 2] == pytest.approx(b.leak_0, rel=1e-4)


def _scan(cfg0, which, scales=(0.0, 0.5, 1.0, 2.0, 4.0)):
    base = cfg0.rates
    plateaus = [base.induced_10.plateau, base.induced_01.plateau, base.leak_from_1.plateau, base.leak_from_0.plateau]
    F, Q = [], []
    for scale in scales:
        if which == "gamma":
            rates = replace(base, gamma_down_intrinsic=base.gamma_down_intrinsic * scale)
        else:
            x = list(plateaus)
            k = ["p10", "p01", "pl1", "pl0"].index(which)
            x[k] = min(plateaus[k] * scale, 0.5)
            rates = base.with_plateaus(*x)
        cfg = replace(cfg0, rates=rates)
        F.append(expected_fidelity(cfg).F)
        Q.append(expected_qnd(cfg).P_qnd)
    return np.array(F), np.array(Q)


@pytest.mark.parametrize("which", ["p10", "p01", "pl0", "gamma"])
def test_qnd_monotone_in_each_error_rate(calibrated_readout, which):
    _, Q = _scan(calibrated_readout, which)
    assert np.all(np.diff(Q) <= 1e-12)


@pytest.mark.parametrize("which", ["p10", "p01", "pl0", "gamma"])
def test_fidelity_monotone_in_each_assignment_error_rate(calibrated_readout, which):
    F, _ = _scan(calibrated_readout, which)
    assert np.all(np.diff(F) <= 1e-12)


def test_leakage_from_one_shields_against_decay(calibrated_readout):
    # 1 -> l yields label l, which is not a 0 label; leaking first removes
    # the later 1 -> 0 channel, so F rises by at most p(1->l) * p(1->0)
    F, Q = _scan(calibrated_readout, "pl1")
    base = calibrated_readout.rates
    p_decay = base.induced_10.plateau + PULSE.T_r * base.gamma_down_intrinsic
    bound = 4 * base.leak_from_1.plateau * p_decay
    assert np.all(np.diff(F) >= 0) and np.all(np.diff(Q) >= 0)
    assert F[-1] - F[0] <= bound
    # two pulses: the second readout sees the same protection
    assert Q[-1] - Q[0] <= 2 * bound
