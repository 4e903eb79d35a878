"""Measurable quantities assembled from the spectral solution.

Internal rates are in units of Gamma and delays in units of 1/Gamma; fields
suffixed ``_si`` are in s^-1 or seconds. Frequency integrals use the measure
d omega / 2 pi, so spectral densities integrate to rates by a plain sum
times ``d_omega / 2 pi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from .errors import (
    CalibrationUnreachable,
    GridTooNarrow,
    GridTooShort,
    InvalidArgument,
    UndefinedBandwidth,
    UndefinedCorrelation,
    UndefinedPairingRatio,
)
from .fourier import to_delay_domain
from .params import GridSpec, SystemParams, validate
from .propagation import NoiseKernels, TransferCoefficients, propagate, z_integral
from .spectral_solver import DiffusionMatrix, SpectralGrid, build_relaxation_table, diffusion_matrix, solve_spectrum
from .steady_state import SteadyState, solve_zeroth_order

EDGE_TOLERANCE = 1e-4
T0_FRACTION = 0.005
T0_MIN_BINS = 10


@dataclass(frozen=True)
class RateResult:
    omega: np.ndarray
    density_s: np.ndarray
    density_as: np.ndarray
    correlated_s: float
    correlated_as: float
    uncorrelated_s: float
    uncorrelated_as: float
    gamma_si: float

    @property
    def r_s(self) -> float:
        return self.correlated_s + self.uncorrelated_s

    @property
    def r_as(self) -> float:
        return self.correlated_as + self.uncorrelated_as

    @property
    def r_b(self) -> float:
        """Biphoton generation rate; identified with the anti-Stokes rate."""
        return self.r_as

    @property
    def r_s_si(self) -> float:
        return self.r_s * self.gamma_si

    @property
    def r_as_si(self) -> float:
        return self.r_as * self.gamma_si

    @property
    def r_b_si(self) -> float:
        return self.r_b * self.gamma_si


@dataclass(frozen=True)
class PairingRatio:
    anti_stokes: float
    stokes: float

    @property
    def value(self) -> float:
        return self.anti_stokes


@dataclass(frozen=True)
class SimulationResult:
    params: SystemParams
    grid: GridSpec
    steady: SteadyState
    diffusion: DiffusionMatrix
    spectral: SpectralGrid
    transfer: TransferCoefficients
    kernels: NoiseKernels
    rates: RateResult
    cross_kernel: np.ndarray


@dataclass(frozen=True)
class Wavepacket:
    tau: np.ndarray
    tau_s: np.ndarray
    g2_cross: np.ndarray
    g2_ss: np.ndarray
    g2_asas: np.ndarray
    r_c: np.ndarray
    r_c_si: np.ndarray
    r_sb: float
    cs_factor: float
    r_p_area: float
    t0: float
    t0_s: float


def _measure(omega: np.ndarray) -> float:
    return float(omega[1] - omega[0]) / (2 * math.pi)


def photon_rates(
    transfer: TransferCoefficients,
    kernels: NoiseKernels,
    diffusion: DiffusionMatrix,
    gamma_si: float,
    check_grid: bool = True,
) -> RateResult:
    """Stokes and anti-Stokes generation rates with their correlated split."""
    ds = diffusion.stokes_block()
    das = diffusion.anti_stokes_block()
    p, q = kernels.p, kernels.q
    noise_s = z_integral(np.einsum("mwi,ij,mwj->mw", p.conj(), ds, p).real, kernels.u)
    noise_as = z_integral(np.einsum("mwi,ij,mwj->mw", q, das, q.conj()).real, kernels.u)
    pair_s = np.abs(transfer.b) ** 2
    pair_as = np.abs(transfer.c) ** 2
    dens_s = pair_s + noise_s
    dens_as = pair_as + noise_as
    if check_grid:
        _check_edges(dens_s, "Stokes")
        _check_edges(dens_as, "anti-Stokes")
    h = _measure(transfer.omega)
    return RateResult(
        transfer.omega,
        dens_s,
        dens_as,
        float(pair_s.sum() * h),
        float(pair_as.sum() * h),
        float(noise_s.sum() * h),
        float(noise_as.sum() * h),
        float(gamma_si),
    )


def _check_edges(density: np.ndarray, label: str) -> None:
    peak = float(np.max(np.abs(density)))
    if peak == 0.0:
        return
    edge = max(abs(density[0]), abs(density[-1]))
    if edge > EDGE_TOLERANCE * peak:
        raise GridTooNarrow(f"{label} spectral density at the grid edge is {edge / peak:.2e} of its peak")


def correlation_kernel(transfer: TransferCoefficients, kernels: NoiseKernels, diffusion: DiffusionMatrix) -> np.ndarray:
    """Frequency-domain pair amplitude: conj(B) D + int du P^dag D_s Q."""
    ds = diffusion.stokes_block()
    noise = z_integral(np.einsum("mwi,ij,mwj->mw", kernels.p.conj(), ds, kernels.q), kernels.u)
    return np.conj(transfer.b) * transfer.d + noise


def simulate(params: SystemParams, grid: GridSpec | None = None, check_grid: bool = True) -> SimulationResult:
    """Full pipeline from parameters to rates and the pair kernel."""
    grid = grid or GridSpec()
    validate(params)
    steady = solve_zeroth_order(params)
    diff = diffusion_matrix(steady, build_relaxation_table(params.gamma_21))
    spectral = solve_spectrum(params, steady, grid.omegas())
    transfer, kernels = propagate(params, spectral, grid.n_z)
    rates = photon_rates(transfer, kernels, diff, params.gamma_si, check_grid=check_grid)
    kernel = correlation_kernel(transfer, kernels, diff)
    return SimulationResult(params, grid, steady, diff, spectral, transfer, kernels, rates, kernel)


def cross_correlation(omega: np.ndarray, kernel: np.ndarray, rates: RateResult, pad: int = 4):
    """(tau, g2_cross, amplitude) with g2 = 1 + |f|^2 / (R_s R_as)."""
    if rates.r_s <= 0 or rates.r_as <= 0:
        raise UndefinedCorrelation("cross-correlation needs non-zero Stokes and anti-Stokes rates")
    tau, amp = to_delay_domain(omega, kernel, pad)
    return tau, 1.0 + np.abs(amp) ** 2 / (rates.r_s * rates.r_as), amp


def auto_correlations(rates: RateResult, pad: int = 4):
    """(tau, g2_ss, g2_asas) of the thermal single-arm fields."""
    if rates.r_s <= 0 or rates.r_as <= 0:
        raise UndefinedCorrelation("autocorrelation needs non-zero rates")
    tau, fs = to_delay_domain(rates.omega, rates.density_s, pad)
    _, fas = to_delay_domain(rates.omega, rates.density_as, pad)
    return tau, 1.0 + np.abs(fs / rates.r_s) ** 2, 1.0 + np.abs(fas / rates.r_as) ** 2


def _refined_peak(y: np.ndarray) -> tuple[float, int]:
    i = int(np.argmax(y))
    if 0 < i < len(y) - 1:
        a, b, c = y[i - 1], y[i], y[i + 1]
        curv = a - 2 * b + c
        if curv < 0:
            return float(b - (a - c) ** 2 / (8 * curv)), i
    return float(y[i]), i


def signal_to_background(g2_cross: np.ndarray) -> tuple[float, float]:
    """(r_sb, Cauchy-Schwarz factor); the peak is refined by a parabola."""
    r_sb = _refined_peak(np.asarray(g2_cross) - 1.0)[0]
    return r_sb, cauchy_schwarz_factor(r_sb)


def cauchy_schwarz_factor(r_sb: float) -> float:
    return (1.0 + r_sb) ** 2 / 4.0


def pairing_ratio_spectral(rates: RateResult) -> PairingRatio:
    """Correlated fraction of the anti-Stokes (and Stokes) output."""
    if rates.r_as <= 0 or rates.r_s <= 0:
        raise UndefinedPairingRatio("total rate is zero")
    return PairingRatio(rates.correlated_as / rates.r_as, rates.correlated_s / rates.r_s)


def coincidence_rate(g2_cross: np.ndarray, rates: RateResult) -> np.ndarray:
    """R_C(tau) with bin Delta T = 1/R_s, in Gamma units; background = R_B."""
    if rates.r_s <= 0 or rates.r_as <= 0:
        raise UndefinedCorrelation("coincidence rate needs non-zero rates")
    return rates.r_as * np.asarray(g2_cross)


def find_t0(tau: np.ndarray, g2_cross: np.ndarray, fraction: float = T0_FRACTION) -> float:
    """Earliest delay after the peak from which |g2 - 1| stays below
    ``fraction * r_sb`` up to the end of the delay window."""
    excess = np.abs(np.asarray(g2_cross) - 1.0)
    r_sb, peak = _refined_peak(np.asarray(g2_cross) - 1.0)
    above = np.nonzero(excess[peak:] >= fraction * r_sb)[0]
    start = peak + (int(above[-1]) + 1 if above.size else 0)
    if len(tau) - start < T0_MIN_BINS:
        raise GridTooShort("correlation does not settle to the background inside the delay window")
    return float(tau[start])


def pairing_ratio_area(tau: np.ndarray, r_c: np.ndarray, g2_cross: np.ndarray, rates: RateResult) -> tuple[float, float]:
    """(area of R_C - R_B over [0, t0], t0) in Gamma units."""
    excess = np.asarray(r_c) - rates.r_as
    if not np.any(excess):
        return 0.0, float(tau[-1])
    t0 = find_t0(tau, g2_cross)
    sel = (tau >= 0) & (tau <= t0)
    return float(trapezoid(excess[sel], tau[sel])), t0


def build_wavepacket(sim: SimulationResult, pad: int | None = None) -> Wavepacket:
    pad = pad or sim.grid.tau_pad
    rates = sim.rates
    tau, g2, _ = cross_correlation(rates.omega, sim.cross_kernel, rates, pad)
    _, g2_ss, g2_asas = auto_correlations(rates, pad)
    r_sb, cs = signal_to_background(g2)
    r_c = coincidence_rate(g2, rates)
    area, t0 = pairing_ratio_area(tau, r_c, g2, rates)
    gs = sim.params.gamma_si
    return Wavepacket(tau, tau / gs, g2, g2_ss, g2_asas, r_c, r_c * gs, r_sb, cs, area, t0, t0 / gs)


def _fwhm(x: np.ndarray, y: np.ndarray) -> float:
    peak = int(np.argmax(y))
    half = y[peak] / 2
    lo = peak
    while lo > 0 and y[lo] >= half:
        lo -= 1
    hi = peak
    while hi < len(y) - 1 and y[hi] >= half:
        hi += 1
    if y[lo] >= half or y[hi] >= half:
        raise UndefinedBandwidth("spectrum does not fall to half maximum inside the window")
    left = x[lo] + (half - y[lo]) * (x[lo + 1] - x[lo]) / (y[lo + 1] - y[lo])
    right = x[hi - 1] + (half - y[hi - 1]) * (x[hi] - x[hi - 1]) / (y[hi] - y[hi - 1])
    return float(right - left)


def bandwidth_and_brightness(tau: np.ndarray, r_c: np.ndarray, rates: RateResult) -> tuple[float, float]:
    """(FWHM bandwidth in MHz, brightness in s^-1 MHz^-1).

    The bandwidth is the full width at half maximum of |FT(R_C - R_B)|.
    """
    excess = np.asarray(r_c) - rates.r_as
    if not np.any(np.abs(excess) > 0):
        raise UndefinedBandwidth("wavepacket is flat")
    dt = float(tau[1] - tau[0])
    spec = np.abs(np.fft.fftshift(np.fft.fft(excess))) * dt
    nu = np.fft.fftshift(np.fft.fftfreq(len(tau), d=dt)) * 2 * math.pi
    width = _fwhm(nu, spec)
    mhz = width * rates.gamma_si / (2 * math.pi) / 1e6
    return mhz, rates.r_b_si / mhz


def thermal_distribution(n_mean: float, n_max: int) -> np.ndarray:
    """rho_nn = nbar^n / (1 + nbar)^(n+1) for n = 0..n_max."""
    if not math.isfinite(n_mean) or n_mean < 0:
        raise InvalidArgument("mean photon number must be finite and >= 0")
    if int(n_max) < 0:
        raise InvalidArgument("n_max must be >= 0")
    n = np.arange(int(n_max) + 1)
    if n_mean == 0:
        out = np.zeros(len(n))
        out[0] = 1.0
        return out
    ratio = n_mean / (1.0 + n_mean)
    return np.exp(n * math.log(ratio)) / (1.0 + n_mean)


@dataclass(frozen=True)
class DetectionParams:
    eta_s: float = 0.02
    eta_as: float = 0.01
    r_noise_s: float = 0.0
    r_noise_as: float = 0.0
    delta_tau: float = 1.6e-9
    n_stokes: int = 2**18
    r_env: float = 0.0

    def validate(self) -> "DetectionParams":
        bad = []
        for name in ("eta_s", "eta_as"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                bad.append(name)
        for name in ("r_noise_s", "r_noise_as", "r_env"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                bad.append(name)
        if not (math.isfinite(self.delta_tau) and self.delta_tau > 0):
            bad.append("delta_tau")
        if int(self.n_stokes) <= 0:
            bad.append("n_stokes")
        if bad:
            raise InvalidArgument("invalid detection parameters: " + ", ".join(bad), fields=bad)
        return self


@dataclass(frozen=True)
class CountsHistogram:
    bin_start_s: np.ndarray
    expected: np.ndarray
    sampled: np.ndarray | None
    p_s: float
    delta_t: float
    r_env_total: float
    normalized: np.ndarray = field(repr=False)

    @property
    def bin_center_s(self) -> np.ndarray:
        return self.bin_start_s + (self.bin_start_s[1] - self.bin_start_s[0]) / 2


def counts_model(
    tau_s: np.ndarray,
    r_c_si: np.ndarray,
    rates: RateResult,
    det: DetectionParams,
    window: tuple[float, float] | None = None,
    seed: int | None = None,
) -> CountsHistogram:
    """Expected coincidence counts per anti-Stokes bin.

    Three contributions: true coincidences heralded by a genuine Stokes
    click, accidentals from anti-Stokes-channel noise after a genuine
    Stokes click, and accidentals heralded by a Stokes-channel noise click.
    ``det.r_env`` adds an extra flat rate on the normalized scale.
    """
    det.validate()
    r_s, r_as = rates.r_s_si, rates.r_as_si
    heralds = r_s * det.eta_s + det.r_noise_s
    if heralds <= 0:
        raise InvalidArgument("no Stokes detections: rates and noise are all zero")
    p_s = r_s * det.eta_s / heralds
    dt = det.delta_tau
    lo, hi = window if window is not None else (float(tau_s[0]), float(tau_s[-1]))
    nbins = int(math.floor((hi - lo) / dt + 1e-9))
    if nbins < 1:
        raise InvalidArgument("histogram window shorter than one bin")
    if lo < tau_s[0] or lo + nbins * dt > tau_s[-1] + 1e-15:
        raise GridTooShort("histogram window exceeds the computed delay range")
    edges = lo + dt * np.arange(nbins + 1)
    mean_rc = _bin_average(tau_s, r_c_si, edges)
    n = float(det.n_stokes)
    expected = (
        n * p_s * det.eta_as * (mean_rc + det.r_env) * dt
        + n * p_s * det.r_noise_as * dt
        + n * (1 - p_s) * (det.r_noise_as + r_as * det.eta_as) * dt
    )
    if np.any(expected < 0):
        warnings.warn("negative expected counts from round-off clamped to zero", RuntimeWarning, stacklevel=2)
        expected = np.maximum(expected, 0.0)
    r_env_total = det.r_env + det.r_noise_as / det.eta_as + (1 - p_s) / p_s * (det.r_noise_as / det.eta_as + r_as) if p_s > 0 else math.inf
    normalized = expected / (n * p_s * det.eta_as * dt) if p_s > 0 else np.full(nbins, math.inf)
    sampled = None
    if seed is not None:
        sampled = np.random.default_rng(seed).poisson(expected)
    return CountsHistogram(edges[:-1], expected, sampled, p_s, 1.0 / r_s if r_s > 0 else math.inf, r_env_total, normalized)


def _bin_average(t: np.ndarray, y: np.ndarray, edges: np.ndarray) -> np.ndarray:
    cum = np.concatenate([[0.0], np.cumsum((y[1:] + y[:-1]) / 2 * np.diff(t))])
    at = np.interp(edges, t, cum)
    return np.diff(at) / np.diff(edges)


def summarize(sim: SimulationResult, wave: Wavepacket | None = None) -> dict[str, float]:
    """Scalar observables (SI rates) of one simulation."""
    wave = wave or build_wavepacket(sim)
    rp = pairing_ratio_spectral(sim.rates)
    bw, bright = bandwidth_and_brightness(wave.tau, wave.r_c, sim.rates)
    return {
        "r_s": sim.rates.r_s_si,
        "r_as": sim.rates.r_as_si,
        "r_b": sim.rates.r_b_si,
        "r_p_spectral": rp.anti_stokes,
        "r_p_stokes": rp.stokes,
        "r_p_area": wave.r_p_area,
        "t0_ns": wave.t0_s * 1e9,
        "r_sb": wave.r_sb,
        "cs_factor": wave.cs_factor,
        "bandwidth_mhz": bw,
        "brightness": bright,
    }


def generation_rate(params: SystemParams, grid: GridSpec | None = None) -> float:
    """R_B in s^-1 (no grid-edge check, used inside the calibration loop)."""
    return simulate(params, grid, check_grid=False).rates.r_b_si


def calibrate_delta_d(
    od: float,
    omega_c: complex,
    omega_d: complex,
    target_r_b: float,
    base: SystemParams | None = None,
    grid: GridSpec | None = None,
    bracket: tuple[float, float] = (2.0, 50.0),
    rtol: float = 1e-3,
) -> float:
    """Drive detuning that gives ``target_r_b`` (s^-1) on the far-detuned branch."""
    base = base or SystemParams(od=od, omega_d=omega_d, omega_c=omega_c, delta_d=bracket[0])
    template = base.with_(od=od, omega_c=omega_c, omega_d=omega_d)
    if not (math.isfinite(target_r_b) and target_r_b > 0):
        raise CalibrationUnreachable(f"target rate {target_r_b!r} is not positive")

    def excess(dd: float) -> float:
        return generation_rate(template.with_(delta_d=dd), grid) / target_r_b - 1.0

    lo, hi = bracket
    f_lo, f_hi = excess(lo), excess(hi)
    if not (f_lo > 0 > f_hi):
        raise CalibrationUnreachable(
            f"target {target_r_b:.3g} s^-1 not bracketed by delta_d in [{lo}, {hi}]", od=od, omega_c=omega_c
        )
    root = brentq(excess, lo, hi, xtol=1e-6, rtol=1e-8, maxiter=200)
    if abs(excess(root)) >= rtol:
        raise CalibrationUnreachable("root finder did not reach the requested rate tolerance")
    return float(root)
