"""Circuit design optimizer over ``(E_J, C_s, C_t, L_a0)``.

The design reward is a weighted product of smooth factors in (0, 1], one
per design constraint.  The search runs on the logarithms of the four
circuit elements, which keeps them positive without explicit bounds, and
climbs the log-reward with a backtracking (Armijo) line search.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .circuit import CavityParams, CircuitParams, derive_bare_modes
from .errors import DomainError, InitializationError, TmReadoutError

__all__ = [
    "FactorSpec",
    "RewardConfig",
    "RewardBreakdown",
    "AscentOptions",
    "OptimizerState",
    "PARAM_NAMES",
    "to_log_params",
    "from_log_params",
    "design_quantities",
    "evaluate_reward",
    "reward",
    "reward_factor_gradients",
    "log_reward_gradient",
    "fd_gradient",
    "gradient_ascent",
    "multi_start",
]

log = logging.getLogger(__name__)

PARAM_NAMES = ("E_J", "C_s", "C_t", "L_a0")

# factor shapes
GAUSSIAN = "gaussian"  # exp(-(x - target)^2 / 2 width^2)
ABOVE = "above"  # expit((x - target) / width)
ABS_ABOVE = "abs_above"  # 1 - [expit((x + t)/w) - expit((x - t)/w)], i.e. |x| > t
MAXIMIZE_ABS = "maximize_abs"  # 1 - (1 - floor) exp(-x^2 / 2 width^2)
MINIMIZE_ABS = "minimize_abs"  # exp(-|x| / width)
SHAPES = (GAUSSIAN, ABOVE, ABS_ABOVE, MAXIMIZE_ABS, MINIMIZE_ABS)
QUANTITIES = (
    "omega_q", "omega_a", "alpha_q", "alpha_a", "chi_qa", "ej_ec_ratio",
    "omega_02", "delta_02a", "delta_02c", "delta_qc",
)


@dataclass(frozen=True)
class FactorSpec:
    """One reward factor acting on a named design quantity.

    ``target`` is the centre (gaussian) or the threshold (sigmoids); for
    ``maximize_abs`` it is the floor value of the factor at ``x = 0``.
    """

    quantity: str
    shape: str
    target: float
    width: float
    weight: float = 1.0

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise DomainError(f"unknown design quantity {self.quantity!r}; expected one of {QUANTITIES}")
        if self.shape not in SHAPES:
            raise DomainError(f"unknown factor shape {self.shape!r}; expected one of {SHAPES}")
        if not self.width > 0:
            raise DomainError(f"factor width must be > 0, got {self.width!r}")
        if not self.weight >= 0:
            raise DomainError(f"factor weight must be >= 0, got {self.weight!r}")
        if self.shape == MAXIMIZE_ABS and not 0 < self.target < 1:
            raise DomainError("maximize_abs floor must lie in (0, 1)")

    def value(self, x):
        t, w = self.target, self.width
        if self.shape == GAUSSIAN:
            return np.exp(-0.5 * ((x - t) / w) ** 2)
        if self.shape == ABOVE:
            return expit((x - t) / w)
        if self.shape == ABS_ABOVE:
            return 1.0 - (expit((x + t) / w) - expit((x - t) / w))
        if self.shape == MAXIMIZE_ABS:
            return 1.0 - (1.0 - t) * np.exp(-0.5 * (x / w) ** 2)
        return np.exp(-abs(x) / w)

    def derivative(self, x):
        """d(value)/dx."""
        t, w = self.target, self.width
        if self.shape == GAUSSIAN:
            return -self.value(x) * (x - t) / w**2
        if self.shape == ABOVE:
            s = expit((x - t) / w)
            return s * (1.0 - s) / w
        if self.shape == ABS_ABOVE:
            s1, s2 = expit((x + t) / w), expit((x - t) / w)
            return -(s1 * (1.0 - s1) - s2 * (1.0 - s2)) / w
        if self.shape == MAXIMIZE_ABS:
            return (1.0 - t) * np.exp(-0.5 * (x / w) ** 2) * x / w**2
        return -np.sign(x) * self.value(x) / w


def _default_factors():
    return {
        "omega_a": FactorSpec("omega_a", GAUSSIAN, 7.3e9, 0.5e9),
        "alpha_q": FactorSpec("alpha_q", GAUSSIAN, -100e6, 50e6),
        "ej_ec": FactorSpec("ej_ec_ratio", ABOVE, 100.0, 5.0),
        "chi_qa": FactorSpec("chi_qa", ABS_ABOVE, 10e6, 1e6),
        "delta_02a": FactorSpec("delta_02a", ABS_ABOVE, 300e6, 50e6),
        "delta_02c": FactorSpec("delta_02c", ABS_ABOVE, 300e6, 50e6),
        "delta_qc": FactorSpec("delta_qc", MAXIMIZE_ABS, 0.1, 3e9),
        "alpha_a": FactorSpec("alpha_a", MINIMIZE_ABS, 0.0, 5e6),
    }


@dataclass(frozen=True)
class RewardConfig:
    """Named reward factors; the reward is ``prod_k f_k ** weight_k``."""

    factors: dict = field(default_factory=_default_factors)

    def scaled(self, c):
        """Same shapes with every weight multiplied by ``c``."""
        return RewardConfig({k: replace(f, weight=f.weight * c) for k, f in self.factors.items()})


@dataclass
class RewardBreakdown:
    value: float
    factors: dict
    quantities: dict
    diagnostic: str = ""


# ---------------------------------------------------------------------------
# design quantities with their log-parameter Jacobians


def to_log_params(circuit):
    return np.log([circuit.E_J, circuit.C_s, circuit.C_t, circuit.L_a0])


def from_log_params(x, template):
    """CircuitParams with elements ``exp(x)`` and the template's flux settings."""
    E_J, C_s, C_t, L_a0 = np.exp(np.asarray(x, dtype=float))
    return CircuitParams(
        C_s=float(C_s), C_t=float(C_t), E_J=float(E_J), L_a0=float(L_a0),
        A_ratio=template.A_ratio, Phi_ext=template.Phi_ext,
    )


def design_quantities(circuit, cavity, with_jacobian=False):
    """Quantities the reward acts on, optionally with d/d(log params).

    Returns a dict ``name -> value`` or ``name -> (value, grad[4])``.
    """
    bare = derive_bare_modes(circuit)
    wc = cavity.omega_c
    E_J, C_s, C_t = circuit.E_J, circuit.C_s, circuit.C_t
    e1 = np.array([1.0, 0.0, 0.0, 0.0])

    # log-derivatives of the building blocks
    dln_ecq = np.array([0.0, -1.0, 0.0, 0.0])
    den = 8.0 * C_t + 4.0 * C_s
    dln_eca = np.array([0.0, -4.0 * C_s / den, -8.0 * C_t / den, 0.0])
    r = bare.dilution - 1.0
    dln_d = r * np.array([-1.0, 0.0, 0.0, -1.0]) / bare.dilution

    chi = bare.chi_qa
    g_chi = 0.5 * chi * (dln_ecq + dln_eca - dln_d)
    g_alpha_q = bare.alpha_q * dln_ecq
    g_alpha_a = bare.alpha_a * (dln_eca - dln_d)
    plasma_q = np.sqrt(8.0 * bare.E_Jq * bare.E_Cq)
    g_omega_q = 0.5 * plasma_q * (e1 + dln_ecq) + g_alpha_q + g_chi
    plasma_a = 4.0 * np.sqrt(E_J * bare.E_Ca * bare.dilution)
    g_omega_a = 0.5 * plasma_a * (e1 + dln_eca + dln_d) + g_alpha_a + g_chi
    ratio = bare.E_Jq / bare.E_Cq
    g_omega_02 = 2.0 * g_omega_q + g_alpha_q

    q = {
        "omega_q": (bare.omega_q, g_omega_q),
        "omega_a": (bare.omega_a, g_omega_a),
        "alpha_q": (bare.alpha_q, g_alpha_q),
        "alpha_a": (bare.alpha_a, g_alpha_a),
        "chi_qa": (chi, g_chi),
        "ej_ec_ratio": (ratio, ratio * (e1 - dln_ecq)),
        "omega_02": (bare.omega_02, g_omega_02),
        "delta_02a": (bare.omega_02 - bare.omega_a, g_omega_02 - g_omega_a),
        "delta_02c": (bare.omega_02 - wc, g_omega_02),
        "delta_qc": (bare.omega_q - wc, g_omega_q),
    }
    if with_jacobian:
        return q
    return {k: float(v[0]) for k, v in q.items()}


def evaluate_reward(circuit, cavity, cfg=None):
    """Reward with its per-factor breakdown.

    A circuit for which the mode derivation fails scores 0 and the reason
    is stored in ``diagnostic``.
    """
    cfg = cfg or RewardConfig()
    try:
        with np.errstate(all="raise", under="ignore"):
            quantities = design_quantities(circuit, cavity)
            factors = {k: float(f.value(quantities[f.quantity])) for k, f in cfg.factors.items()}
    except (TmReadoutError, FloatingPointError, OverflowError) as exc:
        msg = f"mode derivation failed: {exc}"
        log.debug(msg)
        return RewardBreakdown(0.0, {}, {}, msg)
    value = 1.0
    for k, f in cfg.factors.items():
        if f.weight > 0:
            value *= factors[k] ** f.weight
    return RewardBreakdown(float(value), factors, quantities)


def reward(circuit, cavity, cfg=None):
    """Scalar design reward in [0, 1]."""
    return evaluate_reward(circuit, cavity, cfg).value


def reward_factor_gradients(circuit, cavity, cfg=None):
    """Analytic gradient of every factor value with respect to the log parameters."""
    cfg = cfg or RewardConfig()
    q = design_quantities(circuit, cavity, with_jacobian=True)
    out = {}
    for k, f in cfg.factors.items():
        x, g = q[f.quantity]
        out[k] = f.derivative(x) * g
    return out


def log_reward_gradient(circuit, cavity, cfg=None):
    """Analytic gradient of ``log reward`` with respect to the log parameters."""
    cfg = cfg or RewardConfig()
    b = evaluate_reward(circuit, cavity, cfg)
    grads = reward_factor_gradients(circuit, cavity, cfg)
    total = np.zeros(4)
    for k, f in cfg.factors.items():
        if f.weight > 0:
            total += f.weight * grads[k] / b.factors[k]
    return total


def fd_gradient(fun, x, step=1e-5):
    """Central finite-difference gradient of ``fun`` at ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        dx = np.zeros_like(x)
        dx[i] = step
        g[i] = (fun(x + dx) - fun(x - dx)) / (2.0 * step)
    return g


# ---------------------------------------------------------------------------
# ascent


@dataclass(frozen=True)
class AscentOptions:
    tol: float = 1e-6
    max_steps: int = 10_000
    fd_step: float = 1e-5
    armijo: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1e-2
    max_backtracks: int = 60
    #: "fd" (central differences) or "analytic"
    gradient: str = "fd"


@dataclass
class OptimizerState:
    params: CircuitParams
    reward: float
    gradient: np.ndarray
    step: int
    converged: bool
    trajectory: list = field(default_factory=list)  # rows: step, reward, E_J, C_s, C_t, L_a0, |grad|

    @property
    def rewards(self):
        return np.array([row[1] for row in self.trajectory])


def _log_reward_fn(template, cavity, cfg):
    def f(x):
        try:
            c = from_log_params(x, template)
        except (DomainError, FloatingPointError, OverflowError):
            return -np.inf
        r = reward(c, cavity, cfg)
        return np.log(r) if r > 0 else -np.inf

    return f


def gradient_ascent(init, cavity, cfg=None, opts=None):
    """Maximize the reward from ``init`` by gradient ascent on log-reward.

    The first trial step of each iteration uses the Barzilai-Borwein length
    from the previous iteration; the Armijo condition then shrinks it until
    the reward increases sufficiently, so the logged rewards never decrease.

    Raises
    ------
    InitializationError
        If ``reward(init) == 0``.
    """
    cfg = cfg or RewardConfig()
    opts = opts or AscentOptions()
    if opts.gradient not in ("fd", "analytic"):
        raise DomainError(f"gradient must be 'fd' or 'analytic', got {opts.gradient!r}")
    start = evaluate_reward(init, cavity, cfg)
    if start.value <= 0:
        raise InitializationError(f"zero reward at the initial point: {start.diagnostic or 'a factor vanishes'}")
    f = _log_reward_fn(init, cavity, cfg)

    def grad(x):
        if opts.gradient == "fd":
            return fd_gradient(f, x, opts.fd_step)
        return log_reward_gradient(from_log_params(x, init), cavity, cfg)

    x = to_log_params(init)
    fx = f(x)
    g = grad(x)
    step_len = opts.initial_step / max(np.linalg.norm(g), 1e-300)
    traj = [(0, float(np.exp(fx)), *np.exp(x), float(np.linalg.norm(g)))]
    converged = bool(np.linalg.norm(g) < opts.tol)
    k = 0
    while not converged and k < opts.max_steps:
        gg = g @ g
        t = step_len
        for _ in range(opts.max_backtracks):
            x_new = x + t * g
            f_new = f(x_new)
            if f_new >= fx + opts.armijo * t * gg:
                break
            t *= opts.shrink
        else:
            log.debug("line search stalled at step %d", k)
            break
        g_new = grad(x_new)
        s, y = x_new - x, g_new - g
        sy = s @ y
        # BB step for a maximization: s.s / -(s.y), positive on concave patches
        step_len = (s @ s) / -sy if sy < 0 else 2.0 * t
        x, fx, g = x_new, f_new, g_new
        k += 1
        traj.append((k, float(np.exp(fx)), *np.exp(x), float(np.linalg.norm(g))))
        converged = bool(np.linalg.norm(g) < opts.tol)
    return OptimizerState(
        params=from_log_params(x, init),
        reward=float(np.exp(fx)),
        gradient=g,
        step=k,
        converged=converged,
        trajectory=traj,
    )


def multi_start(inits, cavity, cfg=None, opts=None, workers=1):
    """Independent ascents from several starting circuits, best first."""
    def run(c):
        return gradient_ascent(c, cavity, cfg, opts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, inits))
    else:
        results = [run(c) for c in inits]
    return sorted(results, key=lambda s: -s.reward)


PREVIOUS_WORK = CircuitParams(C_s=110e-15, C_t=59.6e-15, E_J=29.2e9, L_a0=5.32e-9)
PREVIOUS_WORK_CAVITY = CavityParams(omega_c=7.169e9, g_ac=295e6)
