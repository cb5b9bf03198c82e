import numpy as np
import pytest

import oracles
from tmreadout.calibration import (
    fit_line,
    fit_lines,
    lorentzian,
    photons_from_shift,
    read_stark_map,
    synth_stark_map,
    write_stark_map,
)
from tmreadout.errors import CalibrationError, DomainError
from tmreadout.readout.engine import make_rng

OMEGA_Q, CHI = 2.0332e9, -0.77e6
POWERS = np.linspace(0.0, 2e-3, 21)
PROBE = np.arange(1.65e9, 2.06e9 + 1, 0.5e6)
PPW = 1e5


def stark(seed=0, noise=0.05, anticrossing=None, ppw=PPW, chi=CHI):
    return synth_stark_map(OMEGA_Q, chi, POWERS, PROBE, 6e6, noise, make_rng(seed, 4), ppw, anticrossing=anticrossing)


def test_lorentzian_matches_oracle():
    f = np.linspace(1.9e9, 2.1e9, 101)
    assert np.allclose(lorentzian(f, 2e9, 6e6, 1.3, 0.1), 0.1 + 1.3 * oracles.lorentzian_peak(f, 2e9, 6e6), rtol=1e-14)


def test_zero_power_line_sits_at_qubit_frequency():
    sm = stark(noise=0.0)
    assert sm.truth["centers"][0] == OMEGA_Q
    assert sm.probe_freqs[np.argmax(sm.response[0])] == pytest.approx(OMEGA_Q, abs=0.5e6)


def test_noiseless_fit_recovers_centres():
    sm = stark(noise=0.0)
    fits = fit_lines(sm)
    centres = np.array([ft.center for ft in fits])
    assert np.all(np.abs(centres - sm.truth["centers"]) / sm.truth["centers"] < 1e-6)
    assert not any(ft.flagged for ft in fits)


def test_anticrossing_rows_are_flagged_not_dropped():
    sm = stark(seed=1, anticrossing=(1.95e9, 12e6))
    fits = fit_lines(sm)
    assert len(fits) == POWERS.size
    near = np.abs(sm.truth["centers"] - 1.95e9) < 12e6
    assert near.any()
    assert all(fits[i].flagged for i in np.flatnonzero(near))
    far = np.abs(sm.truth["centers"] - 1.95e9) > 100e6
    assert sum(fits[i].flagged for i in np.flatnonzero(far)) <= 1


def test_too_few_rows_is_a_calibration_error():
    sm = stark(seed=2)
    fits = fit_lines(sm)
    for ft in fits[2:]:
        object.__setattr__(ft, "flagged", True)
    with pytest.raises(CalibrationError):
        photons_from_shift(sm.powers, fits, CHI)


def test_zero_chi_is_rejected():
    sm = stark(noise=0.0)
    with pytest.raises(DomainError):
        photons_from_shift(sm.powers, fit_lines(sm), 0.0)


def test_zero_shift_dataset_gives_zero_photons():
    sm = stark(noise=0.0, ppw=0.0)
    cal = photons_from_shift(sm.powers, fit_lines(sm), CHI, omega_q=OMEGA_Q)
    n, _ = cal.photons(sm.powers)
    assert abs(cal.slope) * POWERS[-1] < 1e-3
    assert np.all(np.abs(n) < 1e-3)


def test_slope_round_trip():
    sm = stark(seed=3)
    cal = photons_from_shift(sm.powers, fit_lines(sm), CHI)
    assert cal.slope == pytest.approx(PPW, rel=0.02)
    assert cal.dispersive_slope == pytest.approx(2 * CHI, rel=1e-12)
    # same quantity with the photon law taken from the generator
    assert cal.shift_slope / PPW == pytest.approx(2 * CHI, rel=0.02)


def test_extrapolation_is_flagged():
    cal = photons_from_shift(POWERS, fit_lines(stark(seed=4)), CHI)
    _, extrap = cal.photons([0.5e-3, 5e-3])
    assert extrap.tolist() == [False, True]
    assert cal.power_for(cal.photons(1e-3)[0]) == pytest.approx(1e-3)


def test_linear_law_residuals_are_consistent_with_errors():
    # 81 rows: with 79 degrees of freedom the [0.5, 2] band excludes < 1e-4 of datasets
    powers = np.linspace(0.0, 2e-3, 81)
    sm = synth_stark_map(OMEGA_Q, CHI, powers, PROBE, 6e6, 0.05, make_rng(5, 4), PPW)
    fits = fit_lines(sm)
    cal = photons_from_shift(sm.powers, fits, CHI)
    err = np.array([ft.center_err for ft in fits])
    redchi = np.sum((cal.residuals / err) ** 2) / (cal.n_points - 2)
    assert 0.5 <= redchi <= 2.0


def test_reported_centre_uncertainties_are_honest():
    z = []
    for seed in range(20):
        sm = stark(seed=100 + seed)
        for ft, truth in zip(fit_lines(sm), sm.truth["centers"]):
            if not ft.flagged:
                z.append((ft.center - truth) / ft.center_err)
    z = np.array(z)
    assert z.size > 300
    assert np.mean(np.abs(z) <= 3) >= 0.95
    assert 0.8 <= np.std(z) <= 1.2


def test_fit_without_known_noise_uses_edge_estimate():
    sm = stark(seed=6)
    ft_known = fit_line(sm.probe_freqs, sm.response[5], noise=0.05)
    ft_est = fit_line(sm.probe_freqs, sm.response[5])
    assert ft_est.center == pytest.approx(ft_known.center, abs=1e3)
    assert ft_est.center_err == pytest.approx(ft_known.center_err, rel=0.3)


def test_stark_map_file_round_trip(tmp_path):
    sm = stark(seed=7)
    path = tmp_path / "map.tsv"
    write_stark_map(path, sm)
    back = read_stark_map(path)
    assert np.array_equal(back.powers, sm.powers)
    assert np.array_equal(back.probe_freqs, sm.probe_freqs)
    assert np.array_equal(back.response, sm.response)


def test_malformed_axes_rejected():
    with pytest.raises(DomainError):
        synth_stark_map(OMEGA_Q, CHI, POWERS[::-1], PROBE, 6e6, 0.0, make_rng(0), PPW)
