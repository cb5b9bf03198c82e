"""Vectorized jump-process sampler for pulse sequences.

A sequence is a list of windows (pulses or free waits), each with its own
constant rate matrix.  The qubit path is sampled as a continuous-time Markov
chain over the levels {0, 1, 2}; inside a measured window the integrated IQ
signal is the occupation-weighted average of the level pointers plus
circularly symmetric Gaussian noise.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = ["Measurement", "Window", "SequenceSample", "sample_sequence", "make_rng", "run_batches"]

N_LEVELS = 3
DEFAULT_BATCH = 1 << 16


@dataclass(frozen=True)
class Measurement:
    """Pointer means (one per level), per-quadrature noise and classifier."""

    means: np.ndarray
    sigma: float
    thresholds: object = None
    margin: float = 0.0


@dataclass(frozen=True)
class Window:
    duration: float
    rates: np.ndarray
    measurement: Measurement = None


@dataclass
class SequenceSample:
    iq: np.ndarray  # (n_shots, n_measured) complex
    jumps: np.ndarray  # (n_shots, n_measured) jumps inside each measured window
    total_jumps: np.ndarray  # (n_shots,)
    final: np.ndarray  # (n_shots,)
    paths: list = None  # per shot: list of (window, time, new_level)


def make_rng(seed, *key):
    """Independent generator for a ``(seed, key...)`` stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _evolve(rng, state, duration, Q, occupation, jumps, paths, w_index):
    exit_rate = Q.sum(axis=1)
    cum = np.cumsum(Q, axis=1)
    n = state.size
    t = np.zeros(n)
    active = np.flatnonzero(exit_rate[state] > 0)
    # shots in absorbing levels just sit there
    if occupation is not None:
        idle = np.setdiff1d(np.arange(n), active, assume_unique=True)
        occupation[idle, state[idle]] += duration
    while active.size:
        s = state[active]
        tau = rng.standard_exponential(active.size) / exit_rate[s]
        u = rng.random(active.size)
        t_new = t[active] + tau
        done = t_new >= duration
        if occupation is not None:
            dwell = np.where(done, duration - t[active], tau)
            np.add.at(occupation, (active, s), dwell)
        jumping = active[~done]
        if jumping.size:
            s_j = state[jumping]
            target = u[~done] * exit_rate[s_j]
            new = (cum[s_j] < target[:, None]).sum(axis=1)
            state[jumping] = np.minimum(new, N_LEVELS - 1)
            t[jumping] = t_new[~done]
            jumps[jumping] += 1
            if paths is not None:
                for idx in jumping:
                    paths[idx].append((w_index, float(t[idx]), int(state[idx])))
        alive = exit_rate[state[jumping]] > 0
        if occupation is not None and not alive.all():
            absorbed = jumping[~alive]
            np.add.at(occupation, (absorbed, state[absorbed]), duration - t[absorbed])
        active = jumping[alive]
    return state


def sample_sequence(rng, initial, windows, record_paths=False):
    """Sample every shot of ``initial`` (level array) through ``windows``."""
    state = np.array(initial, dtype=np.int64, copy=True)
    n = state.size
    measured = [w for w in windows if w.measurement is not None]
    iq = np.zeros((n, len(measured)), dtype=complex)
    jumps_in = np.zeros((n, len(measured)), dtype=np.int64)
    total = np.zeros(n, dtype=np.int64)
    paths = [[] for _ in range(n)] if record_paths else None
    m = 0
    for w_index, w in enumerate(windows):
        counter = np.zeros(n, dtype=np.int64)
        if w.measurement is None:
            state = _evolve(rng, state, w.duration, w.rates, None, counter, paths, w_index)
        else:
            occ = np.zeros((n, N_LEVELS))
            state = _evolve(rng, state, w.duration, w.rates, occ, counter, paths, w_index)
            meas = w.measurement
            signal = (occ / w.duration) @ np.asarray(meas.means)
            noise = rng.standard_normal((n, 2))
            iq[:, m] = signal + meas.sigma * (noise[:, 0] + 1j * noise[:, 1])
            jumps_in[:, m] = counter
            m += 1
        total += counter
    return SequenceSample(iq=iq, jumps=jumps_in, total_jumps=total, final=state, paths=paths)


def run_batches(fn, n_items, batch_size=DEFAULT_BATCH, workers=1):
    """Apply ``fn(batch_index, start, stop)`` over fixed-size batches, merged in order.

    Batch boundaries depend only on ``n_items`` and ``batch_size``, so the
    result is independent of ``workers``.
    """
    bounds = [(i, a, min(a + batch_size, n_items)) for i, a in enumerate(range(0, n_items, batch_size))]
    if workers <= 1 or len(bounds) <= 1:
        return [fn(*b) for b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
