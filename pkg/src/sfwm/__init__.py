"""Biphoton generation by spontaneous four-wave mixing in a double-Lambda
cold-atom ensemble: Heisenberg-Langevin spectral simulation with a
perturbative chi(3) cross-check."""

__version__ = "0.1.0"

from .errors import SfwmError
from .params import CALIBRATED_FAMILY, PRESETS, GridSpec, SystemParams
from .steady_state import solve_zeroth_order
from .observables import (
    DetectionParams,
    build_wavepacket,
    calibrate_delta_d,
    counts_model,
    simulate,
    summarize,
)
from .analytic import eit_group_delay, propagate_pulse, wavepacket_chi3

__all__ = [
    "CALIBRATED_FAMILY",
    "PRESETS",
    "DetectionParams",
    "GridSpec",
    "SfwmError",
    "SystemParams",
    "build_wavepacket",
    "calibrate_delta_d",
    "counts_model",
    "eit_group_delay",
    "propagate_pulse",
    "simulate",
    "solve_zeroth_order",
    "summarize",
    "wavepacket_chi3",
]
