"""Two-separator IQ-plane classifier for the labels 0, 1 and l (leakage).

A point ``z`` is projected on two unit normals.  The binary separator decides
0 versus {1, l}; the leakage separator then splits 1 from l.  Points exactly
on the binary boundary go to 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = [
    "LABEL_0",
    "LABEL_1",
    "LABEL_L",
    "LABEL_AMBIGUOUS",
    "LABEL_NAMES",
    "Thresholds",
    "classify",
    "thresholds_from_means",
    "fit_thresholds",
    "best_cut",
    "label_probabilities",
]

LABEL_0, LABEL_1, LABEL_L, LABEL_AMBIGUOUS = 0, 1, 2, 3
LABEL_NAMES = ("0", "1", "l", "ambiguous")


@dataclass(frozen=True)
class Thresholds:
    """Binary normal/offset ``(n, b)`` and leakage normal/offset ``(n_l, b_l)``.

    Normals are unit complex numbers; label 1 means ``Re(conj(n) z) > b``.
    """

    n: complex
    b: float
    n_l: complex
    b_l: float

    def rotated(self, phase):
        r = np.exp(1j * phase)
        return Thresholds(self.n * r, self.b, self.n_l * r, self.b_l)

    def as_dict(self):
        return {
            "n_re": float(np.real(self.n)),
            "n_im": float(np.imag(self.n)),
            "b": float(self.b),
            "n_l_re": float(np.real(self.n_l)),
            "n_l_im": float(np.imag(self.n_l)),
            "b_l": float(self.b_l),
        }


def _project(z, n):
    return np.real(np.conj(n) * z)


def classify(iq, thresholds, margin=0.0):
    """Label IQ points; ``margin > 0`` marks points within it of the binary cut ambiguous.

    Returns an int array (or int for scalar input) with 0, 1, 2 (= l), 3 (= ambiguous).
    """
    z = np.asarray(iq)
    proj = _project(z, thresholds.n)
    proj_l = _project(z, thresholds.n_l)
    labels = np.where(proj_l > thresholds.b_l, LABEL_L, LABEL_1)
    labels = np.where(proj > thresholds.b + margin, labels, LABEL_0)
    if margin > 0:
        amb = (proj > thresholds.b - margin) & (proj <= thresholds.b + margin)
        labels = np.where(amb, LABEL_AMBIGUOUS, labels)
    labels = labels.astype(np.int8)
    return int(labels) if labels.ndim == 0 else labels


def _unit(v):
    a = abs(v)
    if a == 0:
        raise ValueError("coincident pointer means: separator direction undefined")
    return v / a


def thresholds_from_means(means):
    """Perpendicular bisectors of (mu_0, mu_1) and (mu_1, mu_l)."""
    m0, m1, ml = means[0], means[1], means[2]
    n = _unit(m1 - m0)
    n_l = _unit(ml - m1)
    return Thresholds(n, float(_project(0.5 * (m0 + m1), n)), n_l, float(_project(0.5 * (m1 + ml), n_l)))


def best_cut(low, high):
    """Cut ``c`` maximizing ``[P(low <= c) + P(high > c)] / 2`` on two samples.

    The cut is placed midway between neighbouring sample values; the first
    maximum is taken so the result is deterministic.
    """
    low = np.sort(np.asarray(low, dtype=float))
    high = np.sort(np.asarray(high, dtype=float))
    values = np.unique(np.concatenate([low, high]))
    if values.size == 1:
        return float(values[0])
    cuts = np.concatenate([[values[0] - 1.0], 0.5 * (values[1:] + values[:-1])])
    correct_low = np.searchsorted(low, cuts, side="right") / low.size
    correct_high = 1.0 - np.searchsorted(high, cuts, side="right") / high.size
    return float(cuts[np.argmax(correct_low + correct_high)])


def fit_thresholds(iq_by_prep):
    """Fit both separators on calibration shots.

    Parameters
    ----------
    iq_by_prep : dict
        ``{0: iq_array, 1: iq_array, 2: iq_array}`` of shots prepared in each level.

    Directions come from the class means; offsets maximize the assignment
    fidelity of each pair along its direction.
    """
    means = {k: np.mean(v) for k, v in iq_by_prep.items()}
    n = _unit(means[1] - means[0])
    n_l = _unit(means[2] - means[1])
    b = best_cut(_project(iq_by_prep[0], n), _project(iq_by_prep[1], n))
    b_l = best_cut(_project(iq_by_prep[1], n_l), _project(iq_by_prep[2], n_l))
    return Thresholds(n, b, n_l, b_l)


def _upper_tail(x):
    return 0.5 * erfc(x / np.sqrt(2.0))


def label_probabilities(z_mean, sigma, thresholds, margin=0.0):
    """Probabilities of labels (0, 1, l, ambiguous) for a Gaussian cloud at ``z_mean``.

    ``sigma`` is the per-quadrature standard deviation.  The two projections
    are treated as independent, which is accurate whenever the cloud sits far
    from at least one of the two cuts.
    """
    z = np.asarray(z_mean)
    proj = _project(z, thresholds.n)
    proj_l = _project(z, thresholds.n_l)
    above_hi = _upper_tail((thresholds.b + margin - proj) / sigma)
    above_lo = _upper_tail((thresholds.b - margin - proj) / sigma)
    p_leak_side = _upper_tail((thresholds.b_l - proj_l) / sigma)
    p0 = 1.0 - above_lo
    pamb = above_lo - above_hi
    pl = above_hi * p_leak_side
    p1 = above_hi - pl
    return np.stack([p0, p1, pl, pamb], axis=-1)
