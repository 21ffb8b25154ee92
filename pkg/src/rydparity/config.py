"""JSON run configuration: schema, defaults and conversion to model objects.

Frequencies are written in MHz.  With ``"times_2pi": true`` (the default)
every ``*_mhz`` field means ``2*pi*value`` rad/us; with ``false`` the number
is taken as an angular frequency in rad/us.  Angles carry a ``_pi`` suffix and
are multiples of pi.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from . import dynamics, gates, model, noise

SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_BOOL = {"type": "boolean"}


def _obj(props: dict) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "times_2pi": _BOOL,
        "description": {"type": "string"},
        "criterion": {"type": "integer", "minimum": 1, "maximum": 14},
        "gate": _obj({
            "parity": {"enum": ["even", "odd"]},
            "gamma_pi": _NUM, "theta_pi": _NUM, "phi_pi": _NUM,
        }),
        "system": _obj({
            "omega_c_mhz": _POS, "delta_mhz": _POS, "c3_mhz_um3": _NUM,
            "c6_d_mhz_um6": _NUM, "c6_p_mhz_um6": _NUM, "d_um": _POS,
            "polar_angle_pi": _NUM, "tau_us": _POS, "stark_compensation": _BOOL,
            "vdw": _BOOL, "detuning_reference": {"enum": ["bare", "compensated"]},
        }),
        "pulse": _obj({"omega_f_mhz": _NONNEG, "alpha": _POS}),
        "noise": _obj({
            "sigma_nm": {"type": "array", "items": _NONNEG, "minItems": 3, "maxItems": 3},
            "phase_control_pi": _NONNEG, "phase_target_pi": _NONNEG,
            "amplitude_control": _NONNEG, "amplitude_target": _NONNEG,
            "channels": {"type": "array", "uniqueItems": True,
                         "items": {"enum": ["position", "phase", "amplitude"]}},
            "shots": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "control_sharing": {"enum": ["auto", "shared", "independent"]},
        }),
        "decay": _obj({
            "enabled": _BOOL, "lifetime_d_us": _POS, "lifetime_p_us": _POS,
            "branching": {"type": "array", "items": _NONNEG, "minItems": 3, "maxItems": 3},
        }),
        "integrator": _obj({
            "max_product": _POS, "samples": {"type": "integer", "minimum": 1},
            "backend": {"enum": ["auto", "cython", "python"]},
        }),
        "optimize": _obj({
            "start": _obj({"omega_c_mhz": _POS, "omega_f_mhz": _POS, "alpha": _POS}),
            "objective": {"enum": ["deterministic", "ensemble"]},
            "max_evals": {"type": "integer", "minimum": 1},
            "xtol": _POS, "step": _POS,
            "restarts": {"type": "integer", "minimum": 0},
            "seed": {"type": "integer", "minimum": 0},
        }),
        "validate": _obj({
            "spectra": _BOOL, "dynamics": _BOOL, "vdw_table": _BOOL,
            "random_triples": {"type": "integer", "minimum": 0},
            "seed": {"type": "integer", "minimum": 0},
        }),
        "codes": _obj({
            "scheme": {"enum": ["repetition", "xzzx"]},
            "errors": {"type": "array", "items": {"type": "string"}},
            "amplitudes": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            "layout": {"type": ["string", "null"]},
        }),
    },
}

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "times_2pi": True,
    "gate": {"parity": "even", "gamma_pi": 1.0, "theta_pi": 0.5, "phi_pi": 1.0},
    "system": {
        "omega_c_mhz": 3.533, "delta_mhz": 86.0, "c3_mhz_um3": 13052.5,
        "c6_d_mhz_um6": 1542600.0, "c6_p_mhz_um6": 5486820.0, "d_um": 5.334,
        "polar_angle_pi": 0.5, "tau_us": 3.0, "stark_compensation": True, "vdw": True,
        "detuning_reference": "bare",
    },
    "pulse": {"omega_f_mhz": 0.5069, "alpha": 0.529},
    "noise": {
        "sigma_nm": [22.0, 25.0, 60.0], "phase_control_pi": 0.01, "phase_target_pi": 0.01,
        "amplitude_control": 0.008, "amplitude_target": 0.008, "channels": [],
        "shots": 100, "seed": 2024, "control_sharing": "auto",
    },
    "decay": {"enabled": False, "lifetime_d_us": 508.0, "lifetime_p_us": 1140.0,
              "branching": [0.125, 0.125, 0.75]},
    "integrator": {"max_product": dynamics.DEFAULT_MAX_PRODUCT, "samples": 200,
                   "backend": "auto"},
    "optimize": {"start": {"omega_c_mhz": 4.3, "omega_f_mhz": 0.4, "alpha": 0.3},
                 "objective": "deterministic", "max_evals": 500, "xtol": 1e-4,
                 "step": 0.05, "restarts": 2, "seed": 0},
    "validate": {"spectra": True, "dynamics": True, "vdw_table": True,
                 "random_triples": 50, "seed": 1},
    "codes": {"scheme": "repetition", "errors": ["I", "X1", "X2", "X3"],
              "amplitudes": [math.sqrt(0.5), math.sqrt(0.5)], "layout": None},
}


class ConfigError(ValueError):
    pass


def validate(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = ".".join(str(p) for p in e.absolute_path) or "<root>"
            lines.append(f"{where}: {e.message}")
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines))


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "start":
            out[k] = _merge(out[k], v)
        elif isinstance(v, dict) and k == "start":
            out[k] = {**out.get(k, {}), **v}
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class RunConfig:
    raw: dict

    @property
    def scale(self) -> float:
        return 2 * math.pi if self.raw["times_2pi"] else 1.0

    def freq(self, value: float) -> float:
        return self.scale * float(value)

    def rotation(self) -> gates.RotationSpec:
        g = self.raw["gate"]
        return gates.RotationSpec(g["gamma_pi"] * math.pi, g["theta_pi"] * math.pi,
                                  g["phi_pi"] * math.pi)

    def system(self) -> model.SystemConfig:
        s = self.raw["system"]
        return model.SystemConfig(
            omega_c=self.freq(s["omega_c_mhz"]), delta=self.freq(s["delta_mhz"]),
            c3=self.freq(s["c3_mhz_um3"]), c6_d=self.freq(s["c6_d_mhz_um6"]),
            c6_p=self.freq(s["c6_p_mhz_um6"]), d=s["d_um"],
            polar_angle=s["polar_angle_pi"] * math.pi, tau=s["tau_us"],
            parity=self.raw["gate"]["parity"], stark_compensation=s["stark_compensation"],
            vdw=s["vdw"], detuning_reference=s["detuning_reference"])

    def pulse(self) -> model.TargetPulse:
        p, rot = self.raw["pulse"], self.rotation()
        return model.TargetPulse(omega_f=self.freq(p["omega_f_mhz"]), alpha=p["alpha"],
                                 tau=self.raw["system"]["tau_us"], gamma=rot.gamma,
                                 theta=rot.theta, phi=rot.phi)

    def noise_spec(self) -> noise.NoiseSpec:
        n = self.raw["noise"]
        ch = set(n["channels"])
        return noise.NoiseSpec(
            sigma_nm=tuple(n["sigma_nm"]), phase_control=n["phase_control_pi"] * math.pi,
            phase_target=n["phase_target_pi"] * math.pi,
            amplitude_control=n["amplitude_control"], amplitude_target=n["amplitude_target"],
            position="position" in ch, phase="phase" in ch, amplitude="amplitude" in ch,
            shots=n["shots"], seed=n["seed"], control_sharing=n["control_sharing"])

    def decay(self) -> dynamics.DecayModel | None:
        d = self.raw["decay"]
        if not d["enabled"]:
            return None
        return dynamics.DecayModel(1.0 / d["lifetime_d_us"], 1.0 / d["lifetime_p_us"],
                                   tuple(d["branching"]))

    def decay_model(self) -> dynamics.DecayModel:
        """Decay rates regardless of the enabled flag."""
        d = self.raw["decay"]
        return dynamics.DecayModel(1.0 / d["lifetime_d_us"], 1.0 / d["lifetime_p_us"],
                                   tuple(d["branching"]))

    @property
    def integrator(self) -> dict:
        return self.raw["integrator"]

    def optimization_start(self) -> tuple[float, float, float]:
        s = self.raw["optimize"]["start"]
        return (self.freq(s["omega_c_mhz"]), self.freq(s["omega_f_mhz"]), float(s["alpha"]))


def from_dict(raw: dict) -> RunConfig:
    raw = dict(raw)
    raw.setdefault("schema_version", SCHEMA_VERSION)
    validate(raw)
    return RunConfig(_merge(DEFAULTS, raw))


def load(path) -> tuple[RunConfig, bytes]:
    data = Path(path).read_bytes()
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    validate(raw)
    return RunConfig(_merge(DEFAULTS, raw)), data


def shipped(name: str) -> Path:
    """Path of a configuration shipped in the package data directory."""
    path = resources.files("rydparity").joinpath("data", name)
    if not path.is_file():
        raise FileNotFoundError(f"no shipped config named {name!r}")
    return Path(str(path))


def shipped_names() -> list[str]:
    root = resources.files("rydparity").joinpath("data")
    return sorted(p.name for p in root.iterdir()
                  if p.name.endswith(".json") and p.name != "xzzx_layout.json")
