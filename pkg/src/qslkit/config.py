"""JSON scenario configuration.

Keys are flat and carry their units (``tau_us``, ``omega0_rad_per_us``).
Unknown keys are rejected; omitted keys take the per-scenario defaults
below.  ``s_list`` entries are numbers or the strings "-inf"/"neginf".
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .metrics import NEG_INF, S_MAX, s_label
from .tomography import EXACT

SCHEMA_VERSION = 1
SCENARIOS = ("fig2", "fig3", "sm-lz-linear", "sm-example1", "prep", "tomography")

OMEGA0_DEFAULT = 2 * math.pi * 0.04
GAMMA_DEFAULT = 2 * math.pi * 0.04
OMEGA_I_DEFAULT = 2 * math.pi * 0.02

_SCENARIO_DEFAULTS = {
    "fig2": {},
    "fig3": {"beta_omega0": 5e28},
    "tomography": {"shots": 50000},
    "prep": {"beta_omega0": 5e28},
    "sm-lz-linear": {
        "schedule": "linear",
        "delta_rad_per_us": 0.01,
        "ramp_a_rad_per_us": 0.2,
        "ramp_b_rad_per_us": 0.4,
        "tau_us": 1000.0,
    },
    "sm-example1": {"s_list": [NEG_INF, 0.0], "t_end_us": 2 * math.pi},
}


@dataclass
class ScenarioConfig:
    scenario: str
    schema_version: int = SCHEMA_VERSION
    seed: int = 0
    output_dir: str = "runs"
    s_list: list = field(default_factory=lambda: [NEG_INF, 0.0])
    n_output: int = 2001
    substeps_per_output: int = 10
    tightness_tol: float = 1e-4
    # Landau-Zener model
    schedule: str = "cosine"
    omega0_rad_per_us: float = OMEGA0_DEFAULT
    delta_rad_per_us: float | None = None  # None -> omega0 / 4
    tau_us: float = 50.0
    ramp_a_rad_per_us: float = 0.2
    ramp_b_rad_per_us: float = 0.4
    counterdiabatic: bool = True
    n_pulse_steps: int = 20
    # sm-example1
    t_end_us: float = 2 * math.pi
    # thermal initial state and preparation
    beta_omega0: float = 5e28
    simulate_prep: bool = False
    gamma_eff_rad_per_us: float = GAMMA_DEFAULT
    omega_i_rad_per_us: float = OMEGA_I_DEFAULT
    prep_n_steps: int = 13
    prep_population: int = 32
    prep_elite_fraction: float = 0.25
    prep_iterations: int = 15
    prep_f_max_rad_per_us: float = 2 * math.pi * 0.05
    prep_delta_max_rad_per_us: float = 2 * math.pi * 0.1
    # tomography
    shots: object = EXACT

    @property
    def delta(self):
        return self.omega0_rad_per_us / 4 if self.delta_rad_per_us is None else self.delta_rad_per_us

    @property
    def beta(self):
        return self.beta_omega0 / self.omega0_rad_per_us

    def resolved(self):
        """JSON-safe dict of every parameter, with derived values filled in."""
        d = asdict(self)
        d["delta_rad_per_us"] = self.delta
        d["s_list"] = [s_label(s) for s in self.s_list]
        d["beta_omega0"] = "inf" if math.isinf(self.beta_omega0) else self.beta_omega0
        return d

    def with_updates(self, **kw):
        return validate(replace(self, **kw))


_FIELDS = set(ScenarioConfig.__dataclass_fields__)


def _parse_s(v):
    if isinstance(v, str):
        if v.strip().lower() in ("-inf", "neginf", "-infinity"):
            return NEG_INF
        try:
            v = float(v)
        except ValueError:
            raise ConfigError(f"s_list entry {v!r} is not a number or '-inf'") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"s_list entry {v!r} is not a number")
    v = float(v)
    if v == NEG_INF:
        return v
    if not math.isfinite(v) or abs(v) > S_MAX:
        raise ConfigError(f"s_list entry {v!r} must be finite with |s| <= {S_MAX:g} or '-inf'")
    return v


def _number(d, key, lo=None, hi=None, lo_open=False, allow_inf=False):
    v = d[key]
    if isinstance(v, str) and allow_inf and v.strip().lower() in ("inf", "infinity"):
        v = math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    v = float(v)
    if math.isnan(v) or (math.isinf(v) and not allow_inf):
        raise ConfigError(f"{key} must be finite, got {v!r}")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(f"{key} = {v!r} out of range (must be {'>' if lo_open else '>='} {lo})")
    if hi is not None and v > hi:
        raise ConfigError(f"{key} = {v!r} out of range (must be <= {hi})")
    return v


def _integer(d, key, lo):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"{key} must be an integer >= {lo}, got {v!r}")
    return v


def from_dict(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")
    merged = dict(_SCENARIO_DEFAULTS[scenario])
    merged.update(raw)
    return validate(ScenarioConfig(**merged))


def validate(cfg):
    d = asdict(cfg)
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    if d["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {d['schema_version']!r}; this build reads {SCHEMA_VERSION}")
    if not isinstance(d["s_list"], list) or not d["s_list"]:
        raise ConfigError("s_list must be a non-empty list")
    out = {
        "s_list": [_parse_s(v) for v in d["s_list"]],
        "omega0_rad_per_us": _number(d, "omega0_rad_per_us", 0.0, lo_open=True),
        "tau_us": _number(d, "tau_us", 0.0, lo_open=True),
        "ramp_a_rad_per_us": _number(d, "ramp_a_rad_per_us"),
        "ramp_b_rad_per_us": _number(d, "ramp_b_rad_per_us"),
        "t_end_us": _number(d, "t_end_us", 0.0, lo_open=True),
        "beta_omega0": _number(d, "beta_omega0", 0.0, allow_inf=True),
        "gamma_eff_rad_per_us": _number(d, "gamma_eff_rad_per_us", 0.0),
        "omega_i_rad_per_us": _number(d, "omega_i_rad_per_us", 0.0, lo_open=True),
        "prep_elite_fraction": _number(d, "prep_elite_fraction", 0.0, 1.0, lo_open=True),
        "prep_f_max_rad_per_us": _number(d, "prep_f_max_rad_per_us", 0.0, lo_open=True),
        "prep_delta_max_rad_per_us": _number(d, "prep_delta_max_rad_per_us", 0.0, lo_open=True),
        "tightness_tol": _number(d, "tightness_tol", 0.0, 2.0, lo_open=True),
        "n_output": _integer(d, "n_output", 2),
        "substeps_per_output": _integer(d, "substeps_per_output", 1),
        "n_pulse_steps": _integer(d, "n_pulse_steps", 1),
        "prep_n_steps": _integer(d, "prep_n_steps", 1),
        "prep_population": _integer(d, "prep_population", 8),
        "prep_iterations": _integer(d, "prep_iterations", 1),
        "seed": _integer(d, "seed", 0),
    }
    if d["delta_rad_per_us"] is not None:
        out["delta_rad_per_us"] = _number(d, "delta_rad_per_us", 0.0)
    if d["schedule"] not in ("cosine", "linear"):
        raise ConfigError(f"schedule must be 'cosine' or 'linear', got {d['schedule']!r}")
    for key in ("counterdiabatic", "simulate_prep"):
        if not isinstance(d[key], bool):
            raise ConfigError(f"{key} must be true or false")
    shots = d["shots"]
    if isinstance(shots, str) and shots.lower() == EXACT:
        out["shots"] = EXACT
    elif isinstance(shots, bool) or not isinstance(shots, int) or shots < 1:
        raise ConfigError(f"shots must be a positive integer or 'exact', got {shots!r}")
    if not isinstance(d["output_dir"], str):
        raise ConfigError("output_dir must be a string")
    return replace(cfg, **out)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(raw)
