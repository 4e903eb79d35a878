"""Parameter and unit model.

Frequencies, rates and detunings are expressed in units of the excited-state
decay rate Gamma; times are in units of 1/Gamma. ``gamma_si`` (rad/s) is the
only anchor used to convert to SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import InvalidArgument

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_GAMMA_SI = 2.0 * math.pi * 6.0666e6
DEFAULT_MEDIUM_LENGTH = 0.015
DEFAULT_GAMMA_21 = 1e-3
DEFAULT_MISMATCH = 0.37 * math.pi

# Fixed decoherence constants in units of Gamma (row, col are 0-based levels).
EXCITED_DECAY = 1.0
BRANCH_DECAY = 0.5


def coherence_decay_rates(gamma_21: float) -> np.ndarray:
    """Full decay rates gamma_jk of the coherences sigma_jk (decay at gamma_jk/2)."""
    g = np.ones((4, 4))
    np.fill_diagonal(g, 0.0)
    g[0, 1] = g[1, 0] = gamma_21
    g[2, 3] = g[3, 2] = 2.0
    return g


@dataclass(frozen=True)
class SystemParams:
    """Physical knobs of the source, in Gamma units unless stated.

    ``medium_length`` (metres) only enters the free-space phase omega*L/c,
    which ``free_phase`` can switch off.
    """

    od: float
    omega_d: complex
    omega_c: complex
    delta_d: float
    delta_c: float = 0.0
    gamma_21: float = DEFAULT_GAMMA_21
    delta_k_l: float = DEFAULT_MISMATCH
    gamma_si: float = DEFAULT_GAMMA_SI
    medium_length: float = DEFAULT_MEDIUM_LENGTH
    free_phase: bool = True

    def __post_init__(self):
        object.__setattr__(self, "omega_d", complex(self.omega_d))
        object.__setattr__(self, "omega_c", complex(self.omega_c))
        for name in ("od", "delta_d", "delta_c", "gamma_21", "delta_k_l", "gamma_si", "medium_length"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def transit_phase(self) -> float:
        """omega*L/c per unit omega (Gamma units); zero when the flag is off."""
        if not self.free_phase:
            return 0.0
        return self.gamma_si * self.medium_length / SPEED_OF_LIGHT

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class GridSpec:
    """Frequency and spatial quadrature grid.

    The frequency grid is periodic (``endpoint=False``) so that it maps
    directly onto an FFT. ``tau_pad`` zero-pads the kernel before the FFT to
    refine the delay axis.
    """

    omega_min: float = -80.0
    omega_max: float = 80.0
    n_omega: int = 16384
    n_z: int = 128
    tau_pad: int = 4

    def __post_init__(self):
        problems = []
        if not (np.isfinite(self.omega_min) and np.isfinite(self.omega_max)) or self.omega_min >= self.omega_max:
            problems.append("omega_min < omega_max")
        n = int(self.n_omega)
        if n < 2**10 or n & (n - 1):
            problems.append("n_omega must be a power of two >= 1024")
        if int(self.n_z) < 16 or int(self.n_z) % 2:
            problems.append("n_z must be an even integer >= 16")
        if int(self.tau_pad) < 1:
            problems.append("tau_pad >= 1")
        if problems:
            raise InvalidArgument("invalid grid: " + "; ".join(problems), fields=problems)

    @property
    def d_omega(self) -> float:
        return (self.omega_max - self.omega_min) / self.n_omega

    def omegas(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_omega, endpoint=False)

    def z_nodes(self) -> np.ndarray:
        """Normalized positions u = z/L in [0, 1]."""
        return np.linspace(0.0, 1.0, self.n_z + 1)

    def doubled(self) -> "GridSpec":
        return replace(self, n_omega=2 * self.n_omega, n_z=2 * self.n_z)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _finite(x, what: str) -> None:
    if not np.all(np.isfinite(np.asarray(x, dtype=complex))):
        raise InvalidArgument(f"non-finite {what}")


def to_si_time(t_gamma, params: SystemParams):
    """Convert a time in units of 1/Gamma to seconds."""
    _finite(t_gamma, "time")
    return np.asarray(t_gamma) / params.gamma_si if np.ndim(t_gamma) else float(t_gamma) / params.gamma_si


def from_si_time(t_seconds, params: SystemParams):
    _finite(t_seconds, "time")
    return np.asarray(t_seconds) * params.gamma_si if np.ndim(t_seconds) else float(t_seconds) * params.gamma_si


def to_si_rate(rate_gamma, params: SystemParams):
    """Rates in Gamma units -> s^-1."""
    return rate_gamma * params.gamma_si


def to_mhz(omega_gamma, params: SystemParams):
    """Angular frequency in Gamma units -> ordinary frequency in MHz."""
    return omega_gamma * params.gamma_si / (2.0 * math.pi) / 1e6


def validate(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged if every invariant holds."""
    bad = []
    values = params.as_dict()
    for name in ("od", "delta_d", "delta_c", "gamma_21", "delta_k_l", "gamma_si", "medium_length"):
        if not math.isfinite(values[name]):
            bad.append(name)
    for name in ("omega_d", "omega_c"):
        if not np.isfinite(values[name]):
            bad.append(name)
    if math.isfinite(params.od) and params.od < 0:
        bad.append("od")
    if math.isfinite(params.gamma_21) and params.gamma_21 < 0:
        bad.append("gamma_21")
    if math.isfinite(params.gamma_si) and params.gamma_si <= 0:
        bad.append("gamma_si")
    if math.isfinite(params.medium_length) and params.medium_length < 0:
        bad.append("medium_length")
    if bad:
        raise InvalidArgument("invalid parameters: " + ", ".join(dict.fromkeys(bad)), fields=bad)
    return params


# Reference parameter sets used throughout tests and examples.
PRESETS: dict[str, SystemParams] = {
    # slow-light family: OD 15, weak drive, far detuned
    "rabi": SystemParams(od=15, omega_d=1, omega_c=4, delta_d=10),
    "slow": SystemParams(od=15, omega_d=1, omega_c=1, delta_d=10),
    "slow_dc1": SystemParams(od=15, omega_d=1, omega_c=1, delta_d=10, delta_c=1),
    "slow_dc3": SystemParams(od=15, omega_d=1, omega_c=1, delta_d=10, delta_c=3),
    # purity family: OD 10
    "pure_weak": SystemParams(od=10, omega_d=0.5, omega_c=4, delta_d=10),
    "pure_strong": SystemParams(od=10, omega_d=3, omega_c=4, delta_d=10),
    # bright family: fixed generation rate
    "bright_od20": SystemParams(od=20, omega_d=3, omega_c=4, delta_d=5),
    "bright_od120": SystemParams(od=120, omega_d=3, omega_c=8.8, delta_d=14.9),
}

# (OD, coupling Rabi frequency, drive detuning) keeping R_B near 1.3e7 s^-1.
CALIBRATED_FAMILY: tuple[tuple[float, float, float], ...] = (
    (20, 4.0, 5.0),
    (40, 5.0, 8.1),
    (60, 6.2, 10.2),
    (80, 7.2, 12.0),
    (100, 8.0, 13.5),
    (120, 8.8, 14.9),
)


def family_member(od: float, omega_c: float, delta_d: float, omega_d: float = 3.0) -> SystemParams:
    return SystemParams(od=od, omega_d=omega_d, omega_c=omega_c, delta_d=delta_d)
