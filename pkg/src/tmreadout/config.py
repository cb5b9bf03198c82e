"""Strict YAML run configuration and the builders that turn it into model objects.

Every section has a fixed key set; unknown keys, missing required keys and
values of the wrong type raise :class:`ConfigError` naming the offending
field.  Physical values are then validated by the model constructors on
load, and their errors are re-raised as configuration errors.

Measured values in the ``measured`` section override derived ones field by
field (e.g. the characterized readout-mode dispersive shift).
"""

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .circuit import CavityParams, CircuitParams, derive_bare_modes, hybridize
from .errors import ConfigError, TmReadoutError
from .io import FORMATS, STRUCTURED

__all__ = ["Field", "SCHEMA", "RunConfig", "load_config", "parse_config"]


@dataclass(frozen=True)
class Field:
    kind: str  # float, int, bool, str, floats, pair, mapping
    required: bool = False
    default: object = None
    choices: tuple = None


def _req(kind="float"):
    return Field(kind, required=True)


def _opt(default=None, kind="float", choices=None):
    return Field(kind, default=default, choices=choices)


POLARITON_KEYS = ("theta", "omega_l", "omega_u", "alpha_l", "alpha_u", "chi_ql", "chi_qu", "chi_ul", "kappa_l", "kappa_u")
BUDGET_KEYS = ("snr", "relaxation", "induced_10", "induced_01", "leak_1", "leak_0")
PLATEAU_KEYS = ("induced_10", "induced_01", "leak_1", "leak_0")

SCHEMA = {
    "circuit": {
        "C_s": _req(),
        "C_t": _req(),
        "E_J": _req(),
        "L_a0": _req(),
        "A_ratio": _opt(28.0),
        "Phi_ext": _opt(0.0),
    },
    "cavity": {
        "omega_c": _req(),
        "g_ac": _req(),
        "kappa_c": _req(),
        "kappa_a": _req(),
        "kappa_out": _req(),
        "kappa_in": _opt(0.0),
    },
    "measured": {k: _opt() for k in ("omega_q", "alpha_q") + POLARITON_KEYS},
    "spectrum": {
        "n_q": _opt(15, "int"),
        "n_a": _opt(15, "int"),
        "check_convergence": _opt(True, "bool"),
    },
    "limits": {
        "omega_13": _opt(),
        "convention": _opt("angular", "str", ("angular", "cyclic")),
        "T1": _opt(),
        "Q_diel": _opt(),
        "T2": _opt(),
        "temperature": _opt(),
        "phi01_sq": _opt(),
        "dephasing_convention": _opt("cyclic", "str", ("angular", "cyclic")),
    },
    "pulse": {
        "n_bar": _req(),
        "T_r": _req(),
        "eta": _req(),
        "ring_gap": _opt(500e-9),
        "omega_d": _opt(),
    },
    "readout": {
        "n_shots": _opt(100_000, "int"),
        "n_calibration": _opt(20_000, "int"),
        "pre_n_bar": _opt(89.0),
        "pre_T_r": _opt(200e-9),
        "preselect_margin": _opt(1.0),
        "record_shots": _opt(True, "bool"),
    },
    "rates": {
        "T1": _req(),
        "T_eff": _req(),
        "T1_leak": _opt(),
        "calibrate": _opt(True, "bool"),
        "budget": _opt({}, "mapping"),
        "plateaus": _opt({}, "mapping"),
        "step_height": _opt(0.2),
        "n_crit": _opt(),
        "width_frac": _opt(0.1),
    },
    "sweep": {
        "T_grid": _req("floats"),
        "n_grid": _req("floats"),
        "n_shots": _opt(10_000, "int"),
    },
    "calibration": {
        "omega_q": _opt(),
        "chi_qr": _opt(),
        "power_max": _opt(2e-3),
        "n_powers": _opt(21, "int"),
        "photons_per_watt": _opt(1e5),
        "probe_min": _opt(1.65e9),
        "probe_max": _opt(2.06e9),
        "probe_step": _opt(0.5e6),
        "linewidth": _opt(6e6),
        "noise_level": _opt(0.05),
        "amplitude": _opt(1.0),
        "anticrossing": _opt([1.95e9, 12e6], "pair"),
        "redchi_max": _opt(2.0),
    },
    "reward": {"factors": _opt({}, "mapping")},
    "optimizer": {
        "tol": _opt(1e-6),
        "max_steps": _opt(10_000, "int"),
        "fd_step": _opt(1e-5),
        "gradient": _opt("fd", "str", ("fd", "analytic")),
        "initial_step": _opt(1e-2),
    },
}

TOP_LEVEL = {
    "seed": _opt(None, "int"),
    "output_dir": _opt(None, "str"),
    "emit_format": _opt(STRUCTURED, "str", FORMATS),
}
REQUIRED_SECTIONS = ("circuit", "cavity")
FACTOR_KEYS = ("quantity", "shape", "target", "width", "weight")


def _coerce(where, kind, value, choices=None):
    try:
        if kind == "float":
            if isinstance(value, bool):
                raise TypeError
            out = float(value)  # YAML 1.1 reads '1e-9' as a string
            if not np.isfinite(out):
                raise ValueError
        elif kind == "int":
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise TypeError
            out = int(float(value))
        elif kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            out = value
        elif kind == "str":
            if not isinstance(value, str):
                raise TypeError
            out = value
        elif kind == "floats":
            if not isinstance(value, (list, tuple)) or not value:
                raise TypeError
            out = [_coerce(f"{where}[{i}]", "float", v) for i, v in enumerate(value)]
        elif kind == "pair":
            if value is None:
                return None
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise TypeError
            out = [_coerce(f"{where}[{i}]", "float", v) for i, v in enumerate(value)]
        elif kind == "mapping":
            if not isinstance(value, dict):
                raise TypeError
            out = value
        else:  # pragma: no cover
            raise AssertionError(kind)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected {kind}, got {value!r}") from None
    if choices is not None and out not in choices:
        raise ConfigError(f"{where}: must be one of {list(choices)}, got {out!r}")
    return out


def _section(name, raw, schema):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: section must be a mapping")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}: unknown key (allowed: {', '.join(schema)})")
    out = {}
    for key, f in schema.items():
        where = f"{name}.{key}"
        if key in raw and (raw[key] is not None or f.kind == "pair"):
            out[key] = _coerce(where, f.kind, raw[key], f.choices)
        elif f.required:
            raise ConfigError(f"{where}: missing required field")
        else:
            out[key] = f.default
    return out


def _check_mapping(where, raw, allowed):
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}: unknown key (allowed: {', '.join(allowed)})")
    return {k: _coerce(f"{where}.{k}", "float", v) for k, v in raw.items()}


def parse_config(raw):
    """Validate a parsed YAML mapping; returns a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    known = set(SCHEMA) | set(TOP_LEVEL)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown top-level key (allowed: {', '.join(sorted(known))})")
    for name in REQUIRED_SECTIONS:
        if name not in raw:
            raise ConfigError(f"{name}: missing required section")
    top = _section("config", {k: raw[k] for k in TOP_LEVEL if k in raw}, TOP_LEVEL)
    if top["seed"] is not None and top["seed"] < 0:
        raise ConfigError("seed: must be a non-negative integer")
    sections = {name: _section(name, raw[name], SCHEMA[name]) for name in SCHEMA if name in raw}
    if "rates" in sections:
        r = sections["rates"]
        r["budget"] = _check_mapping("rates.budget", r["budget"], BUDGET_KEYS)
        r["plateaus"] = _check_mapping("rates.plateaus", r["plateaus"], PLATEAU_KEYS)
        if not r["calibrate"] and set(r["plateaus"]) != set(PLATEAU_KEYS):
            missing = sorted(set(PLATEAU_KEYS) - set(r["plateaus"]))
            raise ConfigError(f"rates.plateaus.{missing[0]}: required when rates.calibrate is false")
    if "reward" in sections:
        for name, spec in sections["reward"]["factors"].items():
            if not isinstance(spec, dict):
                raise ConfigError(f"reward.factors.{name}: must be a mapping")
            bad = sorted(set(spec) - set(FACTOR_KEYS))
            if bad:
                raise ConfigError(f"reward.factors.{name}.{bad[0]}: unknown key")
    cfg = RunConfig(raw=raw, top=top, sections=sections)
    cfg.validate()
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML: {exc}") from None
    return parse_config(raw)


@dataclass
class RunConfig:
    raw: dict
    top: dict
    sections: dict

    # -- access -----------------------------------------------------------

    @property
    def seed(self):
        return self.top["seed"]

    def section(self, name):
        if name not in self.sections:
            raise ConfigError(f"{name}: missing required section")
        return self.sections[name]

    def has(self, name):
        return name in self.sections

    def validate(self):
        """Build every configured model object once so physical errors surface on load."""
        self.circuit()
        self.cavity()
        self.polariton()
        if self.has("pulse"):
            self.pulse()
        if self.has("rates"):
            self.rate_model(calibrated=False)
        if self.has("reward"):
            self.reward_config()
        if self.has("sweep"):
            s = self.section("sweep")
            if min(s["T_grid"]) <= 0 or min(s["n_grid"]) < 0:
                raise ConfigError("sweep: T_grid must be > 0 and n_grid >= 0")

    # -- builders ---------------------------------------------------------

    def _build(self, where, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TmReadoutError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{where}: {exc}") from None

    def circuit(self):
        return self._build("circuit", CircuitParams, **self.section("circuit"))

    def cavity(self):
        return self._build("cavity", CavityParams, **self.section("cavity"))

    def derived_bare(self):
        return self._build("circuit", derive_bare_modes, self.circuit())

    def derived_polariton(self):
        return self._build("cavity", hybridize, self.derived_bare(), self.cavity())

    def measured(self):
        m = self.sections.get("measured", {})
        return {k: v for k, v in m.items() if v is not None}

    def bare(self):
        """Derived bare modes with measured overrides."""
        bare = self.derived_bare()
        m = self.sections.get("measured", {})
        over = {k: m[k] for k in ("omega_q", "alpha_q") if m.get(k) is not None}
        return replace(bare, **over) if over else bare

    def polariton(self):
        """Hybridized modes from the derived bare ancilla, with measured overrides."""
        pol = self.derived_polariton()
        m = self.sections.get("measured", {})
        over = {k: m[k] for k in POLARITON_KEYS if m.get(k) is not None}
        return replace(pol, **over) if over else pol

    def pulse(self):
        from .readout.pulse import ReadoutPulse

        p = self.section("pulse")
        return self._build(
            "pulse", ReadoutPulse, n_bar=p["n_bar"], T_r=p["T_r"], omega_d=p["omega_d"], ring_gap=p["ring_gap"]
        )

    def limits_options(self):
        return self.sections.get("limits") or _section("limits", {}, SCHEMA["limits"])

    def readout_options(self):
        return self.sections.get("readout") or _section("readout", {}, SCHEMA["readout"])

    def critical_photons(self):
        from .limits import critical_photons

        return self._build(
            "limits", critical_photons, self.bare(), self.polariton(), self.circuit(),
            omega_13=self.limits_options()["omega_13"],
        )

    def rate_model(self, calibrated=True):
        """Rate model with the induced step; plateaus from config when not calibrating."""
        from .readout.rates import InducedProfile, RateModel, detailed_balance_up_rate

        r = self.section("rates")
        if r["T1"] <= 0 or r["T_eff"] < 0:
            raise ConfigError("rates: T1 must be > 0 and T_eff >= 0")
        n_crit = r["n_crit"]
        if n_crit is None:
            n_crit = self.critical_photons().n_lowphi
        gamma = 1.0 / r["T1"]
        bare = self.bare()
        step = {"n_crit": n_crit, "step_height": r["step_height"], "width_frac": r["width_frac"]}
        model = self._build(
            "rates",
            RateModel,
            gamma_down_intrinsic=gamma,
            gamma_up_thermal=detailed_balance_up_rate(gamma, bare.omega_q, r["T_eff"]),
            induced_10=self._build("rates", InducedProfile, **step),
            induced_01=self._build("rates", InducedProfile, **step),
            leak_from_1=InducedProfile(),
            leak_from_0=InducedProfile(),
            gamma_down_leak=None if r["T1_leak"] is None else 1.0 / r["T1_leak"],
        )
        if r["plateaus"]:
            pl = {k: r["plateaus"].get(k, 0.0) for k in PLATEAU_KEYS}
            model = self._build("rates.plateaus", model.with_plateaus, *(pl[k] for k in PLATEAU_KEYS))
        return model

    def budget(self):
        from .readout.budget import ErrorBudget

        return ErrorBudget(**self.section("rates")["budget"])

    def readout_config(self, calibrate=None):
        """:class:`ReadoutConfig` for the experiments, calibrated to the budget if requested."""
        from .readout.experiments import ReadoutConfig, calibrate_rate_model
        from .readout.pulse import ReadoutPulse

        r = self.section("rates")
        ro = self.readout_options()
        pulse = self.pulse()
        bare = self.bare()
        cfg = ReadoutConfig(
            pol=self.polariton(),
            pulse=pulse,
            rates=self.rate_model(),
            eta=self.section("pulse")["eta"],
            omega_q=bare.omega_q,
            alpha_q=bare.alpha_q,
            T_eff=r["T_eff"],
            pre_pulse=self._build(
                "readout", ReadoutPulse, n_bar=ro["pre_n_bar"], T_r=ro["pre_T_r"],
                omega_d=pulse.omega_d, ring_gap=pulse.ring_gap,
            ),
            preselect_margin=ro["preselect_margin"],
            n_calibration=ro["n_calibration"],
        )
        if calibrate if calibrate is not None else r["calibrate"]:
            cfg = calibrate_rate_model(cfg, self.budget())
        return cfg

    def reward_config(self):
        from .optimizer import FactorSpec, RewardConfig

        base = RewardConfig().factors
        factors = dict(base)
        for name, spec in self.section("reward")["factors"].items():
            if name in base:
                merged = {k: getattr(base[name], k) for k in FACTOR_KEYS}
            elif set(spec) != set(FACTOR_KEYS):
                raise ConfigError(f"reward.factors.{name}: new factors need all of {', '.join(FACTOR_KEYS)}")
            else:
                merged = {}
            for k, v in spec.items():
                merged[k] = v if k in ("quantity", "shape") else _coerce(f"reward.factors.{name}.{k}", "float", v)
            factors[name] = self._build(f"reward.factors.{name}", FactorSpec, **merged)
        return RewardConfig(factors)

    def ascent_options(self):
        from .optimizer import AscentOptions

        o = self.sections.get("optimizer") or _section("optimizer", {}, SCHEMA["optimizer"])
        return AscentOptions(
            tol=o["tol"], max_steps=o["max_steps"], fd_step=o["fd_step"], gradient=o["gradient"],
            initial_step=o["initial_step"],
        )

    def calibration_options(self):
        return self.sections.get("calibration") or _section("calibration", {}, SCHEMA["calibration"])
