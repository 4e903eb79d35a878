"""First-order Heisenberg-Langevin response and Langevin diffusion coefficients.

The four first-order coherences are ordered as ``COHERENCES`` =
(sigma_21, sigma_23, sigma_41, sigma_43). In the frequency domain
(d/dt -> -i omega) they obey ``K(omega) x = s_s a_s + s_as a_as^dag + F``
with ``K = -i omega I - K0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, PoleEncountered
from .params import BRANCH_DECAY, SystemParams, coherence_decay_rates, validate
from .steady_state import SteadyState

COHERENCES = ("21", "23", "41", "43")
_PAIRS = tuple((int(s[0]) - 1, int(s[1]) - 1) for s in COHERENCES)
_ROW_23 = 1
_ROW_41 = 2
_POLE_TOL = 1e-14
NUDGE = 1e-6


def _index(label: str) -> tuple[int, int]:
    if len(label) != 2 or not all(ch in "1234" for ch in label):
        raise InternalConsistencyError(f"operator index {label!r} outside the four-level space")
    return int(label[0]) - 1, int(label[1]) - 1


@dataclass(frozen=True)
class RelaxationTable:
    """``coeff[j, k, m, n]``: R_jk = sum_mn coeff * sigma_mn (0-based)."""

    coeff: np.ndarray
    gamma_21: float

    def drift(self, label: str) -> np.ndarray:
        j, k = _index(label)
        return self.coeff[j, k]


def build_relaxation_table(gamma_21: float) -> RelaxationTable:
    c = np.zeros((4, 4, 4, 4), dtype=complex)
    rates = coherence_decay_rates(gamma_21)
    for j in range(4):
        for k in range(4):
            if j != k:
                c[j, k, j, k] = -rates[j, k] / 2
    for ground in (0, 1):
        for excited in (2, 3):
            c[ground, ground, excited, excited] = BRANCH_DECAY
    c[2, 2, 2, 2] = -1.0
    c[3, 3, 3, 3] = -1.0
    return RelaxationTable(c, float(gamma_21))


@dataclass(frozen=True)
class DiffusionMatrix:
    """Langevin correlations ``<F_jk F_ab> -> tensor[j, k, a, b]`` (Gamma units)."""

    tensor: np.ndarray

    def entry(self, first: str, second: str) -> complex:
        j, k = _index(first)
        a, b = _index(second)
        return complex(self.tensor[j, k, a, b])

    def stokes_block(self) -> np.ndarray:
        """M[i, l] = D_{(jk)^dag, (ab)} over the coherence ordering."""
        t = self.tensor
        return np.array([[t[k, j, a, b] for (a, b) in _PAIRS] for (j, k) in _PAIRS])

    def anti_stokes_block(self) -> np.ndarray:
        """M[i, l] = D_{(jk), (ab)^dag} over the coherence ordering."""
        t = self.tensor
        return np.array([[t[j, k, b, a] for (a, b) in _PAIRS] for (j, k) in _PAIRS])


def diffusion_matrix(steady: SteadyState, relax: RelaxationTable, gamma_21: float | None = None) -> DiffusionMatrix:
    """Einstein relation evaluated with the single-atom product rule.

    D_{jk,ab} = delta_ka <R_jb> - <R_jk sigma_ab> - <sigma_jk R_ab>.
    ``gamma_21`` is accepted for interface symmetry; the table already
    carries it and a mismatch is an error.
    """
    c = np.asarray(relax.coeff)
    if c.shape != (4, 4, 4, 4):
        raise InternalConsistencyError(f"relaxation table has shape {c.shape}, expected (4, 4, 4, 4)")
    if gamma_21 is not None and not np.isclose(gamma_21, relax.gamma_21):
        raise InternalConsistencyError("gamma_21 disagrees with the relaxation table")
    e = steady.expectation_matrix()
    drift = np.einsum("jkmn,mn->jk", c, e)
    # <R_jk sigma_ab> = sum_m c[j,k,m,a] <sigma_mb>
    left = np.einsum("jkma,mb->jkab", c, e)
    # <sigma_jk R_ab> = sum_n c[a,b,k,n] <sigma_jn>
    right = np.einsum("abkn,jn->jkab", c, e)
    eye = np.eye(4)
    first = np.einsum("ka,jb->jkab", eye, drift)
    return DiffusionMatrix(first - left - right)


def drift_matrix(params: SystemParams) -> np.ndarray:
    """K0: homogeneous part of d/dt (sigma_21, sigma_23, sigma_41, sigma_43)."""
    wd, wc = params.omega_d, params.omega_c
    dd, dc, g = params.delta_d, params.delta_c, params.gamma_21
    return np.array(
        [
            [-g / 2, 1j * np.conj(wd) / 2, -1j * wc / 2, 0],
            [1j * wd / 2, -(1 - 2j * dd) / 2, 0, -1j * wc / 2],
            [-1j * np.conj(wc) / 2, 0, -(1 + 2j * dc) / 2, 1j * np.conj(wd) / 2],
            [0, -1j * np.conj(wc) / 2, 1j * wd / 2, -(1 - 1j * dd + 1j * dc)],
        ],
        dtype=complex,
    )


def source_vectors(steady: SteadyState) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the Stokes field and of the anti-Stokes conjugate field."""
    e = steady.expectation_matrix()
    stokes = np.array([-1j * e[2, 0], 1j * (e[1, 1] - e[2, 2]), 0, 1j * e[3, 1]])
    anti = np.array([1j * e[1, 3], 0, -1j * (e[0, 0] - e[3, 3]), -1j * e[0, 2]])
    return stokes, anti


def system_matrix(params: SystemParams, omega) -> np.ndarray:
    """K(omega) = -i omega I - K0, broadcast over ``omega`` -> (..., 4, 4)."""
    w = np.asarray(omega, dtype=float)
    return -1j * w[..., None, None] * np.eye(4) - drift_matrix(params)


@dataclass(frozen=True)
class SpectralPoint:
    omega: float
    eps23: complex
    eta23: complex
    eps41: complex
    eta41: complex
    xi_s: np.ndarray
    xi_as: np.ndarray
    residual: float

    def xi(self, channel: str) -> dict[str, complex]:
        v = self.xi_s if channel == "s" else self.xi_as
        return dict(zip(COHERENCES, (complex(x) for x in v)))


@dataclass(frozen=True)
class SpectralGrid:
    """Vectorized first-order response on a frequency grid."""

    omega: np.ndarray
    eps23: np.ndarray
    eta23: np.ndarray
    eps41: np.ndarray
    eta41: np.ndarray
    xi_s: np.ndarray
    xi_as: np.ndarray
    residual: float
    perturbed: np.ndarray

    def point(self, i: int) -> SpectralPoint:
        return SpectralPoint(
            float(self.omega[i]),
            complex(self.eps23[i]),
            complex(self.eta23[i]),
            complex(self.eps41[i]),
            complex(self.eta41[i]),
            self.xi_s[i].copy(),
            self.xi_as[i].copy(),
            self.residual,
        )


def _near_singular(k: np.ndarray) -> np.ndarray:
    scale = np.prod(np.linalg.norm(k, axis=-1), axis=-1)
    return np.abs(np.linalg.det(k)) <= _POLE_TOL * np.where(scale > 0, scale, 1.0)


def _solve(params: SystemParams, steady: SteadyState, omega: np.ndarray):
    k = system_matrix(params, omega)
    singular = _near_singular(k)
    if np.any(singular):
        raise PoleEncountered(
            "singular first-order system", omega=np.atleast_1d(omega)[np.atleast_1d(singular)].tolist()
        )
    kinv = np.linalg.inv(k)
    s_s, s_as = source_vectors(steady)
    x_s = np.einsum("...ij,j->...i", kinv, s_s)
    x_as = np.einsum("...ij,j->...i", kinv, s_as)
    residual = _residual(k, kinv, x_s, x_as, s_s, s_as)
    return kinv, x_s, x_as, residual


def _residual(k, kinv, x_s, x_as, s_s, s_as) -> float:
    worst = 0.0
    for x, s in ((x_s, s_s), (x_as, s_as)):
        r = np.abs(np.einsum("...ij,...j->...i", k, x) - s)
        terms = np.abs(k) * np.abs(x)[..., None, :]
        scale = np.maximum(terms.max(axis=(-1, -2)), np.abs(s).max())
        worst = max(worst, float(np.max(r.max(axis=-1) / np.where(scale > 0, scale, 1.0))))
    eye = np.eye(4)
    r = np.abs(k @ kinv - eye).max(axis=(-1, -2))
    scale = np.maximum((np.abs(k)[..., :, :, None] * np.abs(kinv)[..., None, :, :]).max(axis=(-1, -2, -3)), 1.0)
    worst = max(worst, float(np.max(r / scale)))
    return worst


def solve_first_order(params: SystemParams, steady: SteadyState, omega: float) -> SpectralPoint:
    """Solve the 4x4 system at one frequency."""
    validate(params)
    kinv, x_s, x_as, residual = _solve(params, steady, np.asarray(float(omega)))
    return SpectralPoint(
        float(omega),
        complex(x_s[_ROW_23]),
        complex(x_as[_ROW_23]),
        complex(x_s[_ROW_41]),
        complex(x_as[_ROW_41]),
        kinv[_ROW_23].copy(),
        kinv[_ROW_41].copy(),
        residual,
    )


def solve_spectrum(params: SystemParams, steady: SteadyState, omegas) -> SpectralGrid:
    """Solve on a grid; points sitting on a pole are shifted upward by
    NUDGE of the grid spacing (doubling the shift until the solve is safe)."""
    validate(params)
    w = np.array(omegas, dtype=float)
    perturbed = _near_singular(system_matrix(params, w))
    if np.any(perturbed):
        spacing = float(np.min(np.abs(np.diff(w)))) if w.size > 1 else 1.0
        step = NUDGE * (spacing if spacing > 0 else 1.0)
        base = w[perturbed].copy()
        for _ in range(30):
            w[perturbed] = base + step
            bad = _near_singular(system_matrix(params, w))
            if not bad.any():
                break
            step *= 2
    kinv, x_s, x_as, residual = _solve(params, steady, w)
    return SpectralGrid(
        w,
        x_s[:, _ROW_23],
        x_as[:, _ROW_23],
        x_s[:, _ROW_41],
        x_as[:, _ROW_41],
        kinv[:, _ROW_23, :],
        kinv[:, _ROW_41, :],
        residual,
        perturbed,
    )
