"""Run configuration: a flat ``key = value`` file with dotted namespaces.

Physical values carry their unit in the key (``_gamma``, ``_ns``, ``_per_s``,
``_rad``, ``_m`` ...). Lists are comma separated. ``#`` starts a comment.
Every key has a default, and the fully resolved mapping is echoed into the
header of each output file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, ConfigNotFound
from .observables import DetectionParams
from .params import DEFAULT_GAMMA_SI, DEFAULT_MISMATCH, PRESETS, GridSpec, SystemParams

DEFAULTS: dict[str, object] = {
    "preset": "",
    "system.od": 20.0,
    "system.omega_d_gamma": 3.0,
    "system.omega_d_phase_rad": 0.0,
    "system.omega_c_gamma": 4.0,
    "system.omega_c_phase_rad": 0.0,
    "system.delta_d_gamma": 5.0,
    "system.delta_c_gamma": 0.0,
    "system.gamma_21_gamma": 1e-3,
    "system.delta_k_l_rad": DEFAULT_MISMATCH,
    "system.gamma_si_rad_per_s": DEFAULT_GAMMA_SI,
    "system.medium_length_m": 0.015,
    "system.free_phase": True,
    "grid.omega_min_gamma": -80.0,
    "grid.omega_max_gamma": 80.0,
    "grid.n_omega": 16384,
    "grid.n_z": 128,
    "grid.tau_pad": 4,
    "tau.min_ns": -100.0,
    "tau.max_ns": 1500.0,
    "detection.eta_s": 0.02,
    "detection.eta_as": 0.01,
    "detection.r_noise_s_per_s": 0.0,
    "detection.r_noise_as_per_s": 0.0,
    "detection.delta_tau_ns": 1.6,
    "detection.n_stokes": 2**18,
    "detection.r_env_per_s": 0.0,
    "counts.window_min_ns": -50.0,
    "counts.window_max_ns": 400.0,
    "sweep.variable": "omega_d",
    "sweep.values": (),
    "sweep.paired_omega_c_gamma": (),
    "sweep.paired_delta_d_gamma": (),
    "sweep.write_wavepackets": False,
    "calibrate.target_r_b_per_s": 1.3e7,
    "calibrate.od": (20.0, 40.0, 60.0, 80.0, 100.0, 120.0),
    "calibrate.omega_c_gamma": (4.0, 5.0, 6.2, 7.2, 8.0, 8.8),
    "calibrate.omega_d_gamma": 3.0,
    "calibrate.delta_d_min_gamma": 2.0,
    "calibrate.delta_d_max_gamma": 50.0,
    "pulse.width_e2_ns": 400.0,
    "pulse.window_min_ns": -2000.0,
    "pulse.window_max_ns": 6000.0,
    "pulse.n_samples": 32768,
    "pulse.carrier_gamma": None,
    "pulse.delay_span_gamma": 2.0,
    "pulse.delay_points": 2001,
    "pulse.wavelength_nm": 780.241,
    "run.seed": 0,
    "run.threads": 1,
}

# alternative spellings: key -> (canonical key, conversion)
ALIASES = {
    "system.delta_k_l_pi": ("system.delta_k_l_rad", lambda v: v * math.pi),
    "system.gamma_mhz": ("system.gamma_si_rad_per_s", lambda v: v * 2e6 * math.pi),
    "system.medium_length_cm": ("system.medium_length_m", lambda v: v / 100),
    "detection.delta_tau_s": ("detection.delta_tau_ns", lambda v: v * 1e9),
}

SWEEP_VARIABLES = {
    "omega_d": "omega_d",
    "omega_d_gamma": "omega_d",
    "omega_c": "omega_c",
    "omega_c_gamma": "omega_c",
    "delta_c": "delta_c",
    "delta_c_gamma": "delta_c",
    "delta_d": "delta_d",
    "delta_d_gamma": "delta_d",
    "od": "od",
}


def _parse_scalar(text: str, key: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    if isinstance(default, tuple):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        try:
            return tuple(float(s) for s in items)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a comma-separated list of numbers", key=key) from exc
    value = _parse_scalar(raw, key)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false", key=key)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer", key=key)
        return value
    if isinstance(default, float) or default is None:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number", key=key)
        return float(value)
    return raw


def parse_config_text(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines into a resolved mapping (defaults filled in)."""
    values = dict(DEFAULTS)
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in ALIASES:
            canonical, convert = ALIASES[key]
            value = convert(_coerce(canonical, raw))
            key = canonical
        elif key in DEFAULTS:
            value = _coerce(key, raw)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", key=key)
        if key in seen:
            raise ConfigError(f"line {lineno}: key {key!r} given twice", key=key)
        seen.add(key)
        values[key] = value
    if values["preset"]:
        _apply_preset(values, seen)
    return values


def _apply_preset(values: dict, explicit: set[str]) -> None:
    name = str(values["preset"])
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", key="preset")
    p = PRESETS[name]
    mapping = {
        "system.od": p.od,
        "system.omega_d_gamma": abs(p.omega_d),
        "system.omega_c_gamma": abs(p.omega_c),
        "system.delta_d_gamma": p.delta_d,
        "system.delta_c_gamma": p.delta_c,
        "system.gamma_21_gamma": p.gamma_21,
        "system.delta_k_l_rad": p.delta_k_l,
    }
    for key, v in mapping.items():
        if key not in explicit:
            values[key] = float(v)


def load_config(path: str | Path | None) -> dict[str, object]:
    if path is None:
        return dict(DEFAULTS)
    p = Path(path)
    if not p.is_file():
        raise ConfigNotFound(f"no configuration file at {p}")
    return parse_config_text(p.read_text())


@dataclass(frozen=True)
class RunConfig:
    values: dict
    system: SystemParams
    grid: GridSpec
    detection: DetectionParams

    @property
    def seed(self) -> int:
        return int(self.values["run.seed"])

    @property
    def threads(self) -> int:
        return int(self.values["run.threads"])

    def get(self, key: str):
        return self.values[key]


def build_run_config(values: dict) -> RunConfig:
    v = values
    system = SystemParams(
        od=v["system.od"],
        omega_d=v["system.omega_d_gamma"] * complex(math.cos(v["system.omega_d_phase_rad"]), math.sin(v["system.omega_d_phase_rad"])),
        omega_c=v["system.omega_c_gamma"] * complex(math.cos(v["system.omega_c_phase_rad"]), math.sin(v["system.omega_c_phase_rad"])),
        delta_d=v["system.delta_d_gamma"],
        delta_c=v["system.delta_c_gamma"],
        gamma_21=v["system.gamma_21_gamma"],
        delta_k_l=v["system.delta_k_l_rad"],
        gamma_si=v["system.gamma_si_rad_per_s"],
        medium_length=v["system.medium_length_m"],
        free_phase=v["system.free_phase"],
    )
    grid = GridSpec(
        v["grid.omega_min_gamma"], v["grid.omega_max_gamma"], v["grid.n_omega"], v["grid.n_z"], v["grid.tau_pad"]
    )
    det = DetectionParams(
        eta_s=v["detection.eta_s"],
        eta_as=v["detection.eta_as"],
        r_noise_s=v["detection.r_noise_s_per_s"],
        r_noise_as=v["detection.r_noise_as_per_s"],
        delta_tau=v["detection.delta_tau_ns"] * 1e-9,
        n_stokes=v["detection.n_stokes"],
        r_env=v["detection.r_env_per_s"],
    )
    return RunConfig(dict(values), system, grid, det)


def format_value(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(float(x)) for x in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def header_lines(values: dict, title: str) -> list[str]:
    from . import __version__

    lines = [f"# sfwm {__version__}: {title}"]
    lines += [f"# {key} = {format_value(values[key])}" for key in sorted(values)]
    return lines
