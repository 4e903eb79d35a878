"""Perturbative chi(3) path: susceptibilities, biphoton wavepacket, the
damped-Rabi closed form, EIT group delay and slow-light pulse propagation.

Susceptibilities are returned already multiplied by k L and normalized by
the optical depth, e.g. ``k_as L chi_as = (OD/2) 4x / (|Oc|^2 - 4x(w + i/2))``
with x = w - Dc + i g21/2 (Gamma = 1). This constant reproduces both the
resonant transmission exp(-OD) without coupling and the slow-light delay
OD/|Oc|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooShort, InvalidArgument
from .fourier import to_delay_domain
from .params import SPEED_OF_LIGHT, GridSpec, SystemParams, validate

ANTI_STOKES_WAVELENGTH = 780.241e-9
ALIAS_LIMIT = 1e-3


def _sinc(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 1 - z * z / 6, np.sin(safe) / safe)


def _resonance(params: SystemParams, omega):
    """|Oc|^2 - 4 x (w + i/2) and x."""
    w = np.asarray(omega, dtype=float)
    x = w - params.delta_c + 0.5j * params.gamma_21
    return abs(params.omega_c) ** 2 - 4 * x * (w + 0.5j), x


@dataclass(frozen=True)
class Susceptibilities:
    omega: np.ndarray
    chi_s: np.ndarray
    chi_as: np.ndarray
    chi3: np.ndarray


def anti_stokes_response(params: SystemParams, omega) -> np.ndarray:
    """k_as L chi_as(omega)."""
    if abs(params.omega_c) ** 2 == 0:
        # x cancels: two-level response, finite also at x = 0
        return params.od / 2 * -1.0 / (np.asarray(omega, dtype=float) + 0.5j)
    den, x = _resonance(params, omega)
    return params.od / 2 * 4 * x / den


def stokes_response(params: SystemParams, omega) -> np.ndarray:
    """k_s L chi_s(omega), far-detuned Raman form."""
    w = np.asarray(omega, dtype=float)
    den = abs(params.omega_c) ** 2 - 4 * (w - 0.5j * params.gamma_21) * (w - 0.5j)
    return params.od / 2 * abs(params.omega_d) ** 2 / params.delta_d**2 * (w - 0.5j) / den


def pair_amplitude(params: SystemParams, omega) -> np.ndarray:
    """(Od/Dd) Oc / (|Oc|^2 - 4x(w + i/2)): the nonlinear response up to OD."""
    den, _ = _resonance(params, omega)
    return params.omega_d / params.delta_d * params.omega_c / den


def susceptibilities(params: SystemParams, omega) -> Susceptibilities:
    """chi3 is reported without the field amplitudes: (1/Dd) 4 / resonance."""
    validate(params)
    if params.delta_d == 0:
        raise InvalidArgument("the far-detuned susceptibilities need delta_d != 0")
    den, _ = _resonance(params, omega)
    return Susceptibilities(
        np.asarray(omega, dtype=float),
        stokes_response(params, omega),
        anti_stokes_response(params, omega),
        4.0 / params.delta_d / den,
    )


@dataclass(frozen=True)
class Chi3Wavepacket:
    """Coincidence-rate density of the chi(3) path.

    ``rate`` is in Gamma^2 units so that its integral over tau (1/Gamma)
    is the correlated pair rate in Gamma units; ``rate_si`` is R_C(tau)
    for a one-second bin, in s^-2 * 1 s.
    """

    tau: np.ndarray
    tau_s: np.ndarray
    amplitude: np.ndarray
    rate: np.ndarray
    rate_si: np.ndarray
    integral: float
    integral_si: float
    form: str


FORMS = ("simplified", "full", "constant-sinc")


def chi3_integrand(params: SystemParams, omega, form: str = "simplified") -> np.ndarray:
    """Frequency-domain pair amplitude including the OD/4 prefactor.

    ``simplified`` drops the Stokes susceptibility; ``full`` keeps it in the
    phase-matching and propagation factors; ``constant-sinc`` replaces both
    factors by sinc(dkL/2).
    """
    if form not in FORMS:
        raise InvalidArgument(f"unknown chi3 form {form!r}; expected one of {FORMS}")
    w = np.asarray(omega, dtype=float)
    amp = pair_amplitude(params, w)
    if form == "constant-sinc":
        factor = _sinc(params.delta_k_l / 2)
    else:
        x_as = anti_stokes_response(params, w)
        mirrored = np.conj(anti_stokes_response(params, -w))
        phase = params.delta_k_l / 2 + mirrored / 4
        prop = x_as / 4
        if form == "full":
            x_s = stokes_response(params, -w)
            phase = phase - np.conj(x_s) / 4
            prop = prop + x_s / 4
        factor = _sinc(phase) * np.exp(1j * prop)
    return params.od / 4 * factor * amp


def wavepacket_chi3(params: SystemParams, grid: GridSpec | None = None, form: str = "simplified") -> Chi3Wavepacket:
    """Biphoton coincidence-rate density from the chi(3) wavefunction."""
    validate(params)
    if params.delta_d == 0:
        raise InvalidArgument("the chi3 path needs delta_d != 0")
    grid = grid or GridSpec()
    w = grid.omegas()
    tau, amp = to_delay_domain(w, chi3_integrand(params, w, form), grid.tau_pad)
    rate = np.abs(amp) ** 2
    dtau = float(tau[1] - tau[0])
    total = float(rate.sum() * dtau)
    gs = params.gamma_si
    return Chi3Wavepacket(tau, tau / gs, amp, rate, rate * gs**2, total, total * gs, form)


def chi3_form_difference(params: SystemParams, grid: GridSpec | None = None) -> float:
    """Relative L2 distance between the full and simplified wavepackets."""
    a = wavepacket_chi3(params, grid, "full").rate
    b = wavepacket_chi3(params, grid, "simplified").rate
    return float(np.linalg.norm(a - b) / np.linalg.norm(a))


@dataclass(frozen=True)
class DampedRabiParams:
    gamma_e: complex
    omega_e: complex
    alpha: float
    beta: float
    decay_time: float
    period: float | None
    overdamped: bool


def damped_rabi_params(params: SystemParams) -> DampedRabiParams:
    wc2 = abs(params.omega_c) ** 2
    dc = params.delta_c
    omega_e = complex(np.sqrt(complex(wc2 + dc**2 - 0.25, dc)))
    alpha, beta = omega_e.real, abs(omega_e.imag)
    overdamped = dc == 0 and wc2 + dc**2 <= 0.25
    rate = 0.5 - beta
    decay = 1.0 / rate if rate > 0 else math.inf
    period = None if overdamped or alpha == 0 else 2 * math.pi / alpha
    return DampedRabiParams(complex(1.0, dc), omega_e, alpha, beta, decay, period, overdamped)


def damped_rabi_wavepacket(params: SystemParams, tau) -> tuple[np.ndarray, DampedRabiParams]:
    """Closed-form rate density (same units as ``Chi3Wavepacket.rate``)."""
    validate(params)
    info = damped_rabi_params(params)
    t = np.asarray(tau, dtype=float)
    pref = abs(params.omega_d * params.omega_c * params.od * _sinc(params.delta_k_l / 2) / (8 * params.delta_d)) ** 2
    if info.omega_e == 0:
        shape = (t / 2) ** 2  # sin(z)/Oe -> t/2 as Oe -> 0
        core = pref * np.exp(-t / 2) * shape
    else:
        core = pref / abs(info.omega_e) ** 2 * np.exp(-t / 2) * np.abs(np.sin(info.omega_e * t / 2)) ** 2
    return np.where(t >= 0, core, 0.0), info


def refractive_real(chi) -> np.ndarray:
    """Re sqrt(1 + chi) via sqrt(|1+chi|/2 + (1+Re chi)/2)."""
    chi = np.asarray(chi, dtype=complex)
    re = 1 + chi.real
    mod = np.hypot(re, chi.imag)
    return np.sqrt(mod / 2 + re / 2)


def eit_group_delay(
    params: SystemParams, omega, step: float | None = None, wavelength: float = ANTI_STOKES_WAVELENGTH
) -> np.ndarray:
    """Group delay of the anti-Stokes probe, in units of 1/Gamma.

    tau = (L/c)(Re n - 1) + k L d(Re n)/d omega with n = sqrt(1 + chi);
    the derivative is a central difference with ``step`` (defaults to the
    spacing of ``omega`` when it is a uniform array, else 1e-3).
    """
    validate(params)
    if params.medium_length <= 0:
        raise InvalidArgument("medium_length must be positive for the group delay")
    w = np.asarray(omega, dtype=float)
    if step is None:
        step = float(w.flat[1] - w.flat[0]) if w.ndim == 1 and w.size > 1 else 1e-3
    if not step > 0:
        raise InvalidArgument("derivative step must be positive")
    k_l = 2 * math.pi / wavelength * params.medium_length

    def index(x):
        return refractive_real(anti_stokes_response(params, x) / k_l)

    slope = (index(w + step) - index(w - step)) / (2 * step)
    transit = params.medium_length / SPEED_OF_LIGHT * params.gamma_si
    return transit * (index(w) - 1) + k_l * slope


@dataclass(frozen=True)
class PulseResult:
    t: np.ndarray
    intensity_in: np.ndarray
    intensity_out: np.ndarray
    field_out: np.ndarray

    @property
    def peak_delay(self) -> float:
        return float(self.t[np.argmax(self.intensity_out)] - self.t[np.argmax(self.intensity_in)])


def gaussian_envelope(t, full_width_e2: float, center: float = 0.0) -> np.ndarray:
    """Field amplitude whose intensity falls to 1/e^2 at +-full_width/2."""
    t = np.asarray(t, dtype=float)
    return np.exp(-4 * ((t - center) / full_width_e2) ** 2).astype(complex)


def propagate_pulse(params: SystemParams, t, envelope, carrier: float | None = None) -> PulseResult:
    """Pass a slowly varying envelope through the medium.

    ``t`` is a uniform grid in units of 1/Gamma; the carrier sits at
    ``carrier`` (default: two-photon resonance, omega = delta_c).
    """
    validate(params)
    t = np.asarray(t, dtype=float)
    e_in = np.asarray(envelope, dtype=complex)
    if t.shape != e_in.shape or t.ndim != 1 or len(t) < 4:
        raise InvalidArgument("time grid and envelope must be matching 1-D arrays")
    dt = float(t[1] - t[0])
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
        raise InvalidArgument("time grid must be uniform")
    w0 = params.delta_c if carrier is None else float(carrier)
    nu = np.fft.fftfreq(len(t), d=dt) * 2 * math.pi
    # components exp(-i delta t) sit at fft frequency -delta
    transfer = np.exp(0.5j * anti_stokes_response(params, w0 - nu)) if params.od else np.ones(len(t))
    e_out = np.fft.ifft(np.fft.fft(e_in) * transfer)
    i_in, i_out = np.abs(e_in) ** 2, np.abs(e_out) ** 2
    edge = max(1, len(t) // 50)
    if max(i_out[:edge].max(), i_out[-edge:].max()) > ALIAS_LIMIT * i_out.max():
        raise GridTooShort("output pulse reaches the edge of the time window")
    return PulseResult(t, i_in, i_out, e_out)
