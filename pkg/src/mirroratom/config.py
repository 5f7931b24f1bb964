"""Run configuration: strict sectioned key-value files.

Runs carry tens of parameters, so they live in config files rather than
flags; command-line overrides go through `--set section.key=value`. Parsing
is strict: unknown sections or keys are rejected, and every run echoes its
fully resolved configuration so outputs can be reproduced bit-for-bit.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import (
    HARMONIC_SCALING,
    EXPLICIT_SCALING,
    TransmonModel,
    TransmonParams,
)

TWO_PI = 2.0 * math.pi


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_floats(s: str) -> tuple[float, ...]:
    parts = [p.strip() for p in s.replace(";", ",").split(",") if p.strip()]
    return tuple(float(p) for p in parts)


_PARSERS = {
    "float": float,
    "int": int,
    "str": str.strip,
    "bool": _parse_bool,
    "floats": _parse_floats,
}

# schema: section -> key -> (type, default); default None means optional,
# REQUIRED marks keys a command must receive.
REQUIRED = object()

SCHEMA = {
    "model": {
        "e_c_ghz": ("float", REQUIRED),
        "e_j_ghz": ("float", REQUIRED),
        "levels": ("int", 6),
        "transitions_ghz": ("floats", None),
        "relax_rate_mhz": ("float", REQUIRED),
        "dephase_rate_mhz": ("float", REQUIRED),
        "rate_scaling": ("str", HARMONIC_SCALING),
        "relax_rates_mhz": ("floats", None),
        "dephase_rates_mhz": ("floats", None),
    },
    "pump": {
        "photon_order": ("int", 0),
        "frequency_ghz": ("float", None),  # default: N-photon resonance
        "power_dbm": ("float", REQUIRED),
        "line_offset_db": ("float", 0.0),
    },
    "probe": {
        "power_dbm": ("float", None),
        "line_offset_db": ("float", 0.0),
    },
    "sweep": {
        "probe_start_ghz": ("float", None),
        "probe_stop_ghz": ("float", None),
        "probe_step_mhz": ("float", 1.0),
        "pump_power_start_dbm": ("float", None),
        "pump_power_stop_dbm": ("float", None),
        "pump_power_step_db": ("float", 0.5),
        "probe_power_start_dbm": ("float", None),
        "probe_power_stop_dbm": ("float", None),
        "probe_power_step_db": ("float", 1.0),
        "method": ("str", "linear"),
        "harmonic_cutoff": ("int", 9),
    },
    "sidebands": {
        "pump_powers_dbm": ("floats", REQUIRED),
        "window_start_ghz": ("float", None),
        "window_stop_ghz": ("float", None),
    },
    "emission": {
        "pump_powers_dbm": ("floats", REQUIRED),
        "center_ghz": ("float", None),  # default: pump carrier
        "span_mhz": ("float", 120.0),
        "step_mhz": ("float", 0.1),
    },
    "engine": {
        "cross_mode": ("str", "geometric"),
        "workers": ("int", 0),
    },
    "output": {
        "directory": ("str", "out"),
        "heatmap": ("bool", False),
    },
}

# keys that steer execution, not results; excluded from the reproducibility hash
EXECUTION_KEYS = {("engine", "workers"), ("output", "directory"), ("output", "heatmap")}

# sections every command needs beyond its own
_COMMON = ("model", "engine", "output")
COMMAND_SECTIONS = {
    "reflection-sweep": _COMMON + ("pump", "probe", "sweep"),
    "saturation": _COMMON + ("pump", "probe", "sweep"),
    "sidebands": _COMMON + ("pump", "sidebands"),
    "emission": _COMMON + ("pump", "emission"),
}


@dataclass
class RunConfig:
    """Fully resolved configuration: every known key has a value or None."""

    values: dict = field(default_factory=dict)

    def get(self, section: str, key: str):
        return self.values[section][key]

    def set(self, section: str, key: str, raw: str):
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown configuration key [{section}] {key}")
        kind, _ = SCHEMA[section][key]
        try:
            self.values[section][key] = _PARSERS[kind](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for [{section}] {key}: {exc}") from exc

    def require(self, command: str):
        """Check that every REQUIRED key of the command's sections is set."""
        for section in COMMAND_SECTIONS.get(command, ()):
            for key, (_, default) in SCHEMA[section].items():
                if default is REQUIRED and self.values[section][key] is None:
                    raise ConfigError(f"missing required key [{section}] {key}")

    def canonical_text(self, physics_only: bool = False) -> str:
        """Normalized rendering: sorted sections and keys, unset keys omitted."""
        buf = io.StringIO()
        for section in sorted(self.values):
            entries = {
                k: v
                for k, v in self.values[section].items()
                if v is not None
                and not (physics_only and (section, k) in EXECUTION_KEYS)
            }
            if not entries:
                continue
            buf.write(f"[{section}]\n")
            for key in sorted(entries):
                v = entries[key]
                if isinstance(v, tuple):
                    v = ", ".join(repr(x) for x in v)
                elif isinstance(v, bool):
                    v = "true" if v else "false"
                else:
                    v = repr(v) if isinstance(v, float) else str(v)
                buf.write(f"{key} = {v}\n")
            buf.write("\n")
        return buf.getvalue()

    def sha256(self) -> str:
        """Hash of the result-determining configuration."""
        return hashlib.sha256(self.canonical_text(physics_only=True).encode()).hexdigest()


def _empty_config() -> RunConfig:
    values = {
        section: {key: (None if default in (None, REQUIRED) else default)
                  for key, (_, default) in keys.items()}
        for section, keys in SCHEMA.items()
    }
    return RunConfig(values=values)


def load_config(path, overrides=()) -> RunConfig:
    """Parse a config file; `overrides` are "section.key=value" strings."""
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    parser.optionxform = str.lower
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc

    cfg = _empty_config()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown configuration section [{section}]")
        for key, raw in parser.items(section):
            cfg.set(section, key, raw)
    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {ov!r}")
        target, raw = ov.split("=", 1)
        section, key = target.split(".", 1)
        cfg.set(section.strip(), key.strip(), raw.strip())
    return cfg


def build_model(cfg: RunConfig) -> TransmonModel:
    m = cfg.values["model"]
    transitions = m["transitions_ghz"]
    params = TransmonParams(
        e_c_hz=m["e_c_ghz"] * 1e9,
        e_j_hz=m["e_j_ghz"] * 1e9,
        levels=m["levels"],
        relax_rate_hz=m["relax_rate_mhz"] * 1e6,
        dephase_rate_hz=m["dephase_rate_mhz"] * 1e6,
        transitions_hz=tuple(t * 1e9 for t in transitions) if transitions else None,
    )
    scaling = m["rate_scaling"]
    if scaling not in (HARMONIC_SCALING, EXPLICIT_SCALING):
        raise ConfigError(f"unknown rate scaling {scaling!r}")
    kwargs = {}
    if scaling == EXPLICIT_SCALING:
        if m["relax_rates_mhz"] is None or m["dephase_rates_mhz"] is None:
            raise ConfigError("explicit rate scaling needs relax_rates_mhz and dephase_rates_mhz")
        kwargs = {
            "relax_hz": tuple(x * 1e6 for x in m["relax_rates_mhz"]),
            "dephase_hz": tuple(x * 1e6 for x in m["dephase_rates_mhz"]),
        }
    try:
        return TransmonModel.from_params(params, scaling=scaling, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid model: {exc}") from exc


def pump_frequency_hz(cfg: RunConfig, model: TransmonModel) -> float:
    """Configured pump carrier, defaulting to the N-photon resonance."""
    p = cfg.values["pump"]
    if p["frequency_ghz"] is not None:
        return p["frequency_ghz"] * 1e9
    order = p["photon_order"]
    if order < 1:
        raise ConfigError("pump needs frequency_ghz or a positive photon_order")
    if order > model.dim - 1:
        raise ConfigError(f"photon order {order} exceeds the {model.dim}-level ladder")
    return model.levels.omega[order] / order / TWO_PI


def grid(start, stop, step) -> np.ndarray:
    """Inclusive monotone grid; tolerates float endpoint jitter."""
    if start is None or stop is None:
        raise ConfigError("sweep axis endpoints are missing")
    if step <= 0:
        raise ConfigError("sweep step must be positive")
    if stop < start:
        raise ConfigError("empty sweep axis")
    n = int(round((stop - start) / step))
    axis = start + step * np.arange(n + 1)
    return axis[axis <= stop + 1e-9 * max(abs(stop), 1.0)]
