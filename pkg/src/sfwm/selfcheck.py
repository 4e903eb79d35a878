"""Fast internal-consistency checks, runnable from the command line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .analytic import wavepacket_chi3
from .observables import auto_correlations, build_wavepacket, simulate, thermal_distribution
from .params import PRESETS, GridSpec, SystemParams
from .propagation import assemble_matrix, expm2, propagate, propagation_matrix
from .spectral_solver import build_relaxation_table, diffusion_matrix, solve_spectrum
from .steady_state import solve_zeroth_order

SMALL_GRID = GridSpec(-40.0, 40.0, 4096, 32, 4)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _steady_state() -> Check:
    worst = 0.0
    for p in PRESETS.values():
        s = solve_zeroth_order(p)
        e = s.expectation_matrix()
        worst = max(worst, abs(s.trace - 1), float(np.abs(e - e.conj().T).max()))
        worst = max(worst, float(-min(0.0, np.diag(e).real.min())))
    return Check("steady state is a valid density matrix", worst < 1e-12, f"max violation {worst:.2e}")


def _residual() -> Check:
    p = PRESETS["bright_od20"]
    spec = solve_spectrum(p, solve_zeroth_order(p), SMALL_GRID.omegas())
    return Check("first-order solve residual", spec.residual < 1e-10, f"{spec.residual:.2e}")


def _diffusion() -> Check:
    p = SystemParams(od=1, omega_d=0, omega_c=2, delta_d=5)
    d = diffusion_matrix(solve_zeroth_order(p), build_relaxation_table(p.gamma_21))
    err = max(abs(d.entry("14", "41") - 1), abs(d.entry("12", "21") - p.gamma_21))
    return Check("Langevin diffusion ground-state values", err < 1e-12, f"deviation {err:.2e}")


def _expm() -> Check:
    p = PRESETS["rabi"]
    spec = solve_spectrum(p, solve_zeroth_order(p), np.linspace(-5, 5, 41))
    m = assemble_matrix(*propagation_matrix(p, spec))
    ours = expm2(m)
    ref = np.array([expm(x) for x in m])
    err = float(np.max(np.abs(ours - ref) / np.maximum(np.abs(ref).max(axis=(1, 2))[:, None, None], 1)))
    return Check("2x2 matrix exponential", err < 1e-10, f"relative error {err:.2e}")


def _vacuum() -> Check:
    p = SystemParams(od=0, omega_d=3, omega_c=4, delta_d=5)
    spec = solve_spectrum(p, solve_zeroth_order(p), SMALL_GRID.omegas())
    t, k = propagate(p, spec, 16)
    err = max(float(np.abs(np.abs(t.a) - 1).max()), float(np.abs(t.b).max()), float(np.abs(k.p).max()))
    return Check("zero optical depth is lossless and noiseless", err < 1e-12, f"deviation {err:.2e}")


def _autocorrelation() -> Check:
    sim = simulate(PRESETS["rabi"], SMALL_GRID)
    tau, g_ss, g_asas = auto_correlations(sim.rates)
    i0 = int(np.argmin(np.abs(tau)))
    err = max(abs(g_ss[i0] - 2), abs(g_asas[i0] - 2))
    return Check("single-arm g2(0) = 2", bool(err < 1e-9), f"deviation {err:.2e}")


def _chi3() -> Check:
    p = PRESETS["rabi"]
    wave = build_wavepacket(simulate(p, SMALL_GRID))
    ref = wavepacket_chi3(p, SMALL_GRID)
    hl = wave.r_c - wave.r_c[0]
    dist = float(np.linalg.norm(hl / hl.max() - ref.rate / ref.rate.max()) / np.linalg.norm(ref.rate / ref.rate.max()))
    return Check("weak-drive agreement with the perturbative path", dist < 0.05, f"normalized L2 {dist:.3g}")


def _thermal() -> Check:
    rho = thermal_distribution(0.3, 200)
    err = abs(rho.sum() - 1) + abs((np.arange(201) * rho).sum() - 0.3)
    return Check("thermal photon statistics", bool(err < 1e-12), f"deviation {err:.2e}")


CHECKS = (_steady_state, _residual, _diffusion, _expm, _vacuum, _autocorrelation, _chi3, _thermal)


def run_selfcheck() -> list[Check]:
    return [check() for check in CHECKS]
