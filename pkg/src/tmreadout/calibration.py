"""AC-Stark photon-number calibration.

A readout drive populating the readout mode with ``n`` photons pulls the
qubit line by ``2 chi_qr n``.  Spectroscopy of the qubit line at several
drive powers therefore gives the conversion from drive power to photons::

    synth_stark_map -> fit_lines -> photons_from_shift

All frequencies in Hz, powers in W (arbitrary reference).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .errors import CalibrationError, DomainError

__all__ = [
    "LineFit",
    "StarkMap",
    "PhotonCalibration",
    "lorentzian",
    "synth_stark_map",
    "fit_line",
    "fit_lines",
    "photons_from_shift",
    "write_stark_map",
    "read_stark_map",
]


def lorentzian(f, center, fwhm, amplitude, offset):
    half = 0.5 * fwhm
    return offset + amplitude * half**2 / ((f - center) ** 2 + half**2)


@dataclass(frozen=True)
class LineFit:
    center: float
    width: float
    center_err: float
    amplitude: float = np.nan
    offset: float = np.nan
    redchi: float = np.nan
    flagged: bool = False
    reason: str = ""


@dataclass
class StarkMap:
    """Two-tone spectroscopy map: ``response[i, j]`` at ``powers[i]``, ``probe_freqs[j]``.

    ``truth`` holds generator values (``n_bar``, ``centers``, ...) when the map
    is synthetic; ``noise_level`` is the per-point noise if known.
    """

    powers: np.ndarray
    probe_freqs: np.ndarray
    response: np.ndarray
    line_fits: list = field(default_factory=list)
    noise_level: float = None
    truth: dict = field(default_factory=dict)

    def __post_init__(self):
        self.powers = np.asarray(self.powers, dtype=float)
        self.probe_freqs = np.asarray(self.probe_freqs, dtype=float)
        self.response = np.asarray(self.response, dtype=float)
        if np.any(np.diff(self.powers) <= 0) or np.any(np.diff(self.probe_freqs) <= 0):
            raise DomainError("power and frequency axes must be strictly increasing")
        if self.response.shape != (self.powers.size, self.probe_freqs.size):
            raise DomainError(
                f"response shape {self.response.shape} does not match axes "
                f"({self.powers.size}, {self.probe_freqs.size})"
            )


@dataclass(frozen=True)
class PhotonCalibration:
    """Linear photon law ``n(P) = slope * P + intercept``."""

    slope: float  # photons / W
    intercept: float  # photons
    shift_slope: float  # Hz / W
    omega_q0: float  # zero-power qubit frequency (Hz)
    chi_qr: float
    residuals: np.ndarray
    power_range: tuple
    n_points: int

    def photons(self, power):
        """Photon number at ``power`` and a mask of extrapolated entries."""
        p = np.asarray(power, dtype=float)
        lo, hi = self.power_range
        return self.slope * p + self.intercept, (p < lo) | (p > hi)

    def power_for(self, n_bar):
        return (n_bar - self.intercept) / self.slope

    def shift_at(self, n_bar):
        """Qubit shift (Hz) at ``n_bar`` photons according to the fitted law."""
        return self.shift_slope * self.power_for(n_bar) + 2.0 * self.chi_qr * self.intercept

    @property
    def dispersive_slope(self):
        """Recovered ``2 chi_qr`` (Hz per photon)."""
        return self.shift_slope / self.slope


def _tls_split(center, f_tls, g_tls):
    """Eigenfrequencies and qubit weights of a qubit line coupled to a TLS."""
    mean = 0.5 * (center + f_tls)
    half = 0.5 * (center - f_tls)
    root = np.sqrt(half**2 + g_tls**2)
    w_plus = 0.5 * (1.0 + half / root) if root > 0 else 0.5
    return (mean + root, w_plus), (mean - root, 1.0 - w_plus)


def synth_stark_map(
    omega_q,
    chi_qr,
    powers,
    probe_freqs,
    linewidth,
    noise_level,
    rng,
    photons_per_watt,
    amplitude=1.0,
    anticrossing=None,
):
    """Noisy Lorentzian qubit lines pulled by ``2 chi_qr n(P)`` with ``n(P)`` linear.

    Parameters
    ----------
    anticrossing : (f_tls, g_tls), optional
        Couples the line to a two-level defect at ``f_tls`` so rows near it
        show two split peaks instead of one.
    """
    if not linewidth > 0:
        raise DomainError("linewidth must be positive")
    if noise_level < 0:
        raise DomainError("noise_level must be >= 0")
    powers = np.asarray(powers, dtype=float)
    f = np.asarray(probe_freqs, dtype=float)
    n_bar = photons_per_watt * powers
    centers = omega_q + 2.0 * chi_qr * n_bar
    response = np.empty((powers.size, f.size))
    for i, c in enumerate(centers):
        if anticrossing is None:
            row = lorentzian(f, c, linewidth, amplitude, 0.0)
        else:
            (f1, w1), (f2, w2) = _tls_split(c, *anticrossing)
            row = lorentzian(f, f1, linewidth, amplitude * w1, 0.0) + lorentzian(f, f2, linewidth, amplitude * w2, 0.0)
        response[i] = row
    if noise_level > 0:
        response = response + noise_level * rng.standard_normal(response.shape)
    truth = {"n_bar": n_bar, "centers": centers, "photons_per_watt": photons_per_watt, "chi_qr": chi_qr, "omega_q": omega_q}
    return StarkMap(powers, f, response, noise_level=noise_level, truth=truth)


def _edge_noise(y):
    k = max(3, y.size // 5)
    edges = np.concatenate([y[:k], y[-k:]])
    return 1.4826 * np.median(np.abs(edges - np.median(edges)))


def fit_line(f, y, noise=None, redchi_max=2.0, window=8.0):
    """Least-squares Lorentzian fit of one spectroscopy row.

    The row is flagged (not dropped) when the fit fails, the centre leaves
    the probed span, or the reduced chi-square within ``window`` linewidths
    of the centre exceeds ``redchi_max``.
    """
    y = np.asarray(y, dtype=float)
    amp0 = y.max() - np.median(y)
    floor = 1e-6 * max(abs(amp0), 1e-300)
    sigma = noise if noise is not None and noise > 0 else _edge_noise(y)
    sigma = max(sigma, floor)
    i0 = int(np.argmax(y))
    above = f[y > np.median(y) + 0.5 * amp0]
    width0 = max(above.max() - above.min(), 2 * (f[1] - f[0])) if above.size else 10 * (f[1] - f[0])
    p0 = (f[i0], width0, amp0, np.median(y))
    span = f[-1] - f[0]
    bounds = ([f[0] - span, 1e-3 * (f[1] - f[0]), 0.0, -np.inf], [f[-1] + span, 2 * span, np.inf, np.inf])
    try:
        popt, pcov = curve_fit(
            lorentzian, f, y, p0=p0, sigma=np.full(y.size, sigma), absolute_sigma=True, bounds=bounds, maxfev=20000
        )
    except (RuntimeError, ValueError) as exc:
        return LineFit(np.nan, np.nan, np.nan, flagged=True, reason=f"fit failed: {exc}")
    perr = np.sqrt(np.diag(pcov))
    # judge the fit near the line, where a second unresolved peak would sit
    near = np.abs(f - popt[0]) <= window * popt[1]
    if near.sum() <= 8:
        near = np.ones_like(near)
    resid = (y[near] - lorentzian(f[near], *popt)) / sigma
    redchi = float(resid @ resid / max(near.sum() - 4, 1))
    reason = ""
    if not np.all(np.isfinite(perr)):
        reason = "non-finite uncertainty"
    elif not f[0] <= popt[0] <= f[-1]:
        reason = "centre outside probed span"
    elif redchi > redchi_max:
        reason = f"poor single-line fit (reduced chi-square {redchi:.2f})"
    return LineFit(
        center=float(popt[0]),
        width=float(popt[1]),
        center_err=float(perr[0]),
        amplitude=float(popt[2]),
        offset=float(popt[3]),
        redchi=redchi,
        flagged=bool(reason),
        reason=reason,
    )


def fit_lines(stark_map, redchi_max=2.0):
    """Fit every power row; results are stored on the map and returned."""
    fits = [
        fit_line(stark_map.probe_freqs, row, stark_map.noise_level, redchi_max) for row in stark_map.response
    ]
    stark_map.line_fits = fits
    return fits


def photons_from_shift(powers, fits, chi_qr, omega_q=None):
    """Linear photon law from fitted line centres.

    The centres of unflagged rows are fitted (weighted by their uncertainty)
    as ``f0 + s P``.  Photons follow from ``n = (centre - omega_q) / (2 chi_qr)``,
    with ``omega_q`` defaulting to the fitted zero-power intercept ``f0``.

    Raises
    ------
    CalibrationError
        With fewer than 3 usable rows.
    """
    if chi_qr == 0:
        raise DomainError("chi_qr must be non-zero")
    powers = np.asarray(powers, dtype=float)
    ok = np.array([not ft.flagged and np.isfinite(ft.center) for ft in fits])
    if ok.sum() < 3:
        raise CalibrationError(f"only {int(ok.sum())} usable line fits, need at least 3")
    p = powers[ok]
    c = np.array([ft.center for ft in fits])[ok]
    err = np.array([ft.center_err for ft in fits])[ok]
    w = 1.0 / np.maximum(err, 1e-12 * np.max(np.abs(c)))
    s, f0 = np.polyfit(p, c, 1, w=w)
    ref = f0 if omega_q is None else omega_q
    return PhotonCalibration(
        slope=float(s / (2.0 * chi_qr)),
        intercept=float((f0 - ref) / (2.0 * chi_qr)),
        shift_slope=float(s),
        omega_q0=float(f0),
        chi_qr=float(chi_qr),
        residuals=c - (f0 + s * p),
        power_range=(float(p.min()), float(p.max())),
        n_points=int(ok.sum()),
    )


def write_stark_map(path, stark_map):
    """Long-format columnar text: power, frequency, response."""
    P, F = np.meshgrid(stark_map.powers, stark_map.probe_freqs, indexing="ij")
    data = np.column_stack([P.ravel(), F.ravel(), stark_map.response.ravel()])
    np.savetxt(path, data, fmt="%.17g", delimiter="\t", header="power\tfrequency\tresponse", comments="")


def read_stark_map(path):
    data = np.loadtxt(path, delimiter="\t", skiprows=1, ndmin=2)
    powers = np.unique(data[:, 0])
    freqs = np.unique(data[:, 1])
    if powers.size * freqs.size != data.shape[0]:
        raise DomainError("stark map file is not a full power x frequency grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    response = data[order, 2].reshape(powers.size, freqs.size)
    return StarkMap(powers, freqs, response)
