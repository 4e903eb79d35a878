"""Coupled-mode propagation of the Stokes field and the anti-Stokes conjugate.

Positions are normalized, u = z/L in [0, 1], so every propagation-matrix
entry is reported already multiplied by L. The Stokes photon leaves at
u = 1 and the anti-Stokes photon at u = 0 (backward geometry).

Two equivalent routes are provided:

* the textbook route: ``integrate_medium`` (closed-form 2x2 exponential),
  ``backward_reorganize`` and ``noise_kernels``;
* ``propagate``: the same quantities assembled from per-slice scattering
  matrices joined with the Redheffer star product. It never forms the
  exponentially large forward transfer matrix, so it stays accurate at
  optical depths where the textbook route loses all significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import GainOverflow, InvalidArgument, ReorganizationSingular
from .params import SystemParams

GAIN_LIMIT = 700.0
SINGULAR_LIMIT = 1e-12
_DEGENERATE = 1e-6


@dataclass(frozen=True)
class TransferCoefficients:
    omega: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    a_p: np.ndarray
    b_p: np.ndarray
    c_p: np.ndarray
    d_p: np.ndarray
    g_r: np.ndarray
    gamma_as: np.ndarray
    kappa_s: np.ndarray
    kappa_as: np.ndarray


@dataclass(frozen=True)
class NoiseKernels:
    """``p[m, i, l]``: weight of noise F_l (coherence order) injected at u_m
    in the Stokes output at frequency i; ``q`` likewise for the anti-Stokes
    conjugate output."""

    u: np.ndarray
    p: np.ndarray
    q: np.ndarray


def propagation_matrix(params: SystemParams, point) -> tuple:
    """(g_R L, Gamma_as L, kappa_s L, kappa_as L) for a point or a grid."""
    w = np.asarray(point.omega, dtype=float)
    scale = 1j * params.od / 4
    free = w * params.transit_phase
    g_r = scale * np.asarray(point.eps23) + 1j * free
    gamma_as = scale * np.asarray(point.eta41) + 1j * params.delta_k_l - 1j * free
    kappa_s = scale * np.asarray(point.eta23)
    kappa_as = scale * np.asarray(point.eps41)
    return g_r, gamma_as, kappa_s, kappa_as


def assemble_matrix(g_r, gamma_as, kappa_s, kappa_as) -> np.ndarray:
    g_r = np.asarray(g_r, dtype=complex)
    m = np.empty(g_r.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = g_r
    m[..., 0, 1] = kappa_s
    m[..., 1, 0] = kappa_as
    m[..., 1, 1] = gamma_as
    return m


def expm2(m: np.ndarray) -> np.ndarray:
    """exp of a stack of 2x2 complex matrices via the Cayley-Hamilton form.

    exp(M) = e^mu [cosh(d) I + sinh(d)/d (M - mu I)], mu = tr/2,
    d = sqrt(mu^2 - det). Near-coalescent eigenvalues use the Taylor
    series of sinh(d)/d.
    """
    m = np.asarray(m, dtype=complex)
    mu = (m[..., 0, 0] + m[..., 1, 1]) / 2
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    d = np.sqrt(mu * mu - det)
    small = np.abs(d) < _DEGENERATE * np.maximum(1.0, np.abs(mu))
    safe = np.where(small, 1.0, d)
    d2 = d * d
    shc = np.where(small, 1 + d2 / 6 + d2 * d2 / 120, np.sinh(safe) / safe)
    ch = np.cosh(d)
    eye = np.eye(2)
    shifted = m - mu[..., None, None] * eye
    return np.exp(mu)[..., None, None] * (ch[..., None, None] * eye + shc[..., None, None] * shifted)


def _check_gain(m: np.ndarray) -> None:
    if not np.all(np.isfinite(m)):
        raise InvalidArgument("propagation matrix is not finite")
    peak = float(np.max(np.abs(m))) if m.size else 0.0
    if peak > GAIN_LIMIT:
        raise GainOverflow(f"propagation matrix entry {peak:.3g} exceeds {GAIN_LIMIT}")


@dataclass(frozen=True)
class MediumSolution:
    primed: np.ndarray  # exp(M L), shape (..., 2, 2)
    u: np.ndarray | None
    propagators: np.ndarray | None  # exp(M L (1 - u_m)), shape (n_u, ..., 2, 2)


def integrate_medium(m: np.ndarray, u: np.ndarray | None = None) -> MediumSolution:
    """Closed-form medium solution; optionally the propagators to the exit."""
    m = np.asarray(m, dtype=complex)
    _check_gain(m)
    primed = expm2(m)
    props = None
    if u is not None:
        u = np.asarray(u, dtype=float)
        props = np.stack([expm2(m * (1.0 - x)) for x in u])
    return MediumSolution(primed, u, props)


def backward_reorganize(primed: np.ndarray):
    """(A, B, C, D) mapping (a_s(0), a_as^dag(L)) to (a_s(L), a_as^dag(0))."""
    ap, bp, cp, dp = primed[..., 0, 0], primed[..., 0, 1], primed[..., 1, 0], primed[..., 1, 1]
    if np.any(np.abs(dp) < SINGULAR_LIMIT):
        raise ReorganizationSingular("|D'| below 1e-12")
    return ap - bp * cp / dp, bp / dp, -cp / dp, 1.0 / dp


def _noise_sources(params: SystemParams, spectral) -> np.ndarray:
    """(n, 2, 4): Langevin forcing of (a_s, a_as^dag) per unit length."""
    amp = 1j * np.sqrt(params.od / 4)
    return amp * np.stack([np.atleast_2d(spectral.xi_s), np.atleast_2d(spectral.xi_as)], axis=-2)


def noise_kernels(params: SystemParams, spectral, medium: MediumSolution) -> NoiseKernels:
    """Kernels from exp(M L (1-u)) applied to the source, then reorganized."""
    src = _noise_sources(params, spectral)
    n = src.shape[0]
    props = medium.propagators.reshape(len(medium.u), n, 2, 2)
    fwd = np.einsum("mnij,njl->mnil", props, src)
    primed = medium.primed.reshape(n, 2, 2)
    bp, dp = primed[..., 0, 1], primed[..., 1, 1]
    p = fwd[..., 0, :] - (bp / dp)[..., None] * fwd[..., 1, :]
    q = -fwd[..., 1, :] / dp[..., None]
    return NoiseKernels(medium.u, p, q)


def _to_scattering(t: np.ndarray) -> np.ndarray:
    a, b, c, d = t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1]
    s = np.empty_like(t)
    s[..., 0, 0] = a - b * c / d
    s[..., 0, 1] = b / d
    s[..., 1, 0] = -c / d
    s[..., 1, 1] = 1.0 / d
    return s


def _star(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Join two slices. Inputs: (Stokes at entry, anti-Stokes at exit);
    outputs: (Stokes at exit, anti-Stokes at entry)."""
    a1, b1, c1, d1 = left[..., 0, 0], left[..., 0, 1], left[..., 1, 0], left[..., 1, 1]
    a2, b2, c2, d2 = right[..., 0, 0], right[..., 0, 1], right[..., 1, 0], right[..., 1, 1]
    den = 1 - b1 * c2
    s = np.empty_like(left)
    s[..., 0, 0] = a2 * a1 / den
    s[..., 0, 1] = b2 + a2 * b1 * d2 / den
    s[..., 1, 0] = c1 + d1 * c2 * a1 / den
    s[..., 1, 1] = d1 * d2 / den
    return s


def propagate(params: SystemParams, spectral, n_z: int) -> tuple[TransferCoefficients, NoiseKernels]:
    """Transfer coefficients and noise kernels by slice-wise scattering."""
    entries = propagation_matrix(params, spectral)
    m = assemble_matrix(*entries)
    _check_gain(m)
    n = m.shape[0]
    slice_s = _to_scattering(expm2(m / n_z))
    eye = np.zeros((n, 2, 2), dtype=complex)
    eye[:, 0, 0] = eye[:, 1, 1] = 1.0
    left = [eye]
    for _ in range(n_z):
        left.append(_star(left[-1], slice_s))
    right = [eye]
    for _ in range(n_z):
        right.append(_star(slice_s, right[-1]))
    right.reverse()
    total = left[-1]
    a, b, c, d = total[:, 0, 0], total[:, 0, 1], total[:, 1, 0], total[:, 1, 1]
    d_p = 1.0 / d
    b_p = b * d_p
    c_p = -c * d_p
    a_p = a + b_p * c_p * d
    transfer = TransferCoefficients(spectral.omega, a, b, c, d, a_p, b_p, c_p, d_p, *entries)

    src = _noise_sources(params, spectral)
    s1, s2 = src[:, 0, :], src[:, 1, :]
    p = np.empty((n_z + 1, n, 4), dtype=complex)
    q = np.empty_like(p)
    for k in range(n_z + 1):
        sl, sr = left[k], right[k]
        # fields just after a localized source at u_k, solved self-consistently
        den = (1 - sr[:, 1, 0] * sl[:, 0, 1])[:, None]
        back = (sr[:, 1, 0][:, None] * s1 - s2) / den
        q[k] = sl[:, 1, 1][:, None] * back
        p[k] = sr[:, 0, 0][:, None] * (sl[:, 0, 1][:, None] * back + s1)
    return transfer, NoiseKernels(np.linspace(0.0, 1.0, n_z + 1), p, q)


def z_integral(values: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Composite Simpson over the leading (spatial) axis."""
    return simpson(values, x=u, axis=0)
