"""Deterministic error-budget evaluator and rate calibration.

The evaluator propagates a level distribution through a window sequence
allowing at most one jump per shot, integrates the jump time with
composite Gauss-Legendre quadrature and classifies each (mixed) pointer with the
Gaussian-cloud label probabilities.  With per-shot transition probabilities
of order 1e-2 the neglected two-jump paths are of order 1e-4, which is well
inside the statistical resolution of the targets it is used for.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..errors import CalibrationError
from .classify import label_probabilities

__all__ = ["ErrorBudget", "joint_label_probabilities", "calibrate_plateaus"]

N_LABELS = 4  # 0, 1, l, ambiguous


@dataclass(frozen=True)
class ErrorBudget:
    """State-averaged readout error contributions.

    Each entry is a contribution to ``[P(1|0) + P(0|1)] / 2``; the SNR term
    hits both states, the others only the state they start from.
    """

    snr: float = 5e-4
    relaxation: float = 2e-3
    induced_10: float = 3.5e-3
    induced_01: float = 1.9e-3
    leak_1: float = 1e-2
    leak_0: float = 1e-4

    @property
    def total(self):
        return self.snr + self.relaxation + self.induced_10 + self.induced_01

    @property
    def p0_given_1(self):
        return self.snr + 2.0 * (self.relaxation + self.induced_10)

    @property
    def p1_given_0(self):
        return self.snr + 2.0 * self.induced_01

    @property
    def fidelity(self):
        return 1.0 - self.total


def _labels_for(meas, z):
    return label_probabilities(z, meas.sigma, meas.thresholds, meas.margin)


def _outer(factors, weights):
    """``sum_k weights[k] * outer(factors[0][k], factors[1][k], ...)``."""
    acc = np.asarray(weights, dtype=float)
    for f in factors:
        acc = acc[..., None] * f.reshape(f.shape[:1] + (1,) * (acc.ndim - 1) + f.shape[1:])
    return acc.sum(axis=0)


def _panel_rule(n_panels, n_per_panel):
    """Composite Gauss-Legendre nodes and weights on [0, 1].

    Panels keep the error small when the label function is a sharp step
    (high SNR), where a single high-order rule converges slowly.
    """
    x, w = np.polynomial.legendre.leggauss(n_per_panel)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    half = 0.5 * np.diff(edges)
    u = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    wq = (half[:, None] * w[None, :]).ravel()
    return u, wq


def joint_label_probabilities(p_init, windows, n_panels=16, n_per_panel=8):
    """Joint label distribution of the measured windows.

    Parameters
    ----------
    p_init : array_like, shape (3,)
    windows : list of engine.Window
        Measured windows need fitted ``thresholds``.

    Returns
    -------
    ndarray of shape ``(4,) * n_measured``
    """
    measured = [i for i, w in enumerate(windows) if w.measurement is not None]
    M = len(measured)
    exits = [w.rates.sum(axis=1) for w in windows]
    durations = np.array([w.duration for w in windows])
    u, wq = _panel_rule(n_panels, n_per_panel)
    n_quad = u.size

    out = np.zeros((N_LABELS,) * M)
    for s, ps in enumerate(p_init):
        if ps == 0:
            continue
        # no jump anywhere
        surv = np.exp(-sum(exits[w][s] * durations[w] for w in range(len(windows))))
        factors = [_labels_for(windows[i].measurement, windows[i].measurement.means[s])[None, :] for i in measured]
        out += ps * _outer(factors, [surv])
        # one jump s -> j inside window w at fraction u
        for w, win in enumerate(windows):
            for j in range(3):
                rate = win.rates[s, j]
                if j == s or rate == 0:
                    continue
                before = sum(exits[v][s] * durations[v] for v in range(w))
                after = sum(exits[v][j] * durations[v] for v in range(w + 1, len(windows)))
                T = durations[w]
                dens = rate * T * np.exp(-before - after - exits[w][s] * u * T - exits[w][j] * (1 - u) * T)
                factors = []
                for i in measured:
                    meas = windows[i].measurement
                    if i < w:
                        f = np.repeat(_labels_for(meas, meas.means[s])[None, :], n_quad, axis=0)
                    elif i > w:
                        f = np.repeat(_labels_for(meas, meas.means[j])[None, :], n_quad, axis=0)
                    else:
                        z = u * meas.means[s] + (1 - u) * meas.means[j]
                        f = _labels_for(meas, z)
                    factors.append(f)
                out += ps * _outer(factors, dens * wq)
    return out


def calibrate_plateaus(evaluate, targets, x0, bounds=(0.0, 0.5), tol=1e-10):
    """Solve for the four induced plateaus so ``evaluate(x)`` hits ``targets``.

    ``evaluate`` maps ``(p10, p01, pl1, pl0)`` to the four fidelity-experiment
    statistics ``(P(0|1), P_bin(1|0), P(l|1), P(l|0))``.

    Raises
    ------
    CalibrationError
        If the targets cannot be met within the bounds.
    """
    targets = np.asarray(targets, dtype=float)
    scale = np.maximum(targets, 1e-6)

    def resid(x):
        return (np.asarray(evaluate(x)) - targets) / scale

    sol = least_squares(resid, x0, bounds=bounds, xtol=tol, ftol=tol, gtol=tol)
    worst = np.max(np.abs(resid(sol.x)))
    if worst > 1e-4:
        raise CalibrationError(
            f"rate calibration missed the budget (worst relative residual {worst:.2e}); "
            f"plateaus at {np.array2string(sol.x, precision=4)}"
        )
    return sol.x
