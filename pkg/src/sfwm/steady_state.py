"""Zeroth-order (classical-field) steady state of the four-level atom.

Levels: |1>, |2> ground; |3>, |4> excited. The drive couples 1-3 and the
coupling field 2-4. Expectation values use ``<sigma_jk>`` with
``sigma_jk = |j><k|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput
from .params import SystemParams, validate


@dataclass(frozen=True)
class SteadyState:
    pop11: float
    pop22: float
    pop33: float
    pop44: float
    coh13: complex
    coh24: complex
    m_denominator: float

    @property
    def trace(self) -> float:
        return self.pop11 + self.pop22 + self.pop33 + self.pop44

    def expectation_matrix(self) -> np.ndarray:
        """4x4 array ``e[j, k] = <sigma_{j+1,k+1}>`` (0-based indices)."""
        e = np.zeros((4, 4), dtype=complex)
        e[0, 0], e[1, 1], e[2, 2], e[3, 3] = self.pop11, self.pop22, self.pop33, self.pop44
        e[0, 2] = self.coh13
        e[2, 0] = np.conj(self.coh13)
        e[1, 3] = self.coh24
        e[3, 1] = np.conj(self.coh24)
        return e


def solve_zeroth_order(params: SystemParams) -> SteadyState:
    """Closed-form steady state (Gamma = 1)."""
    validate(params)
    wd2 = abs(params.omega_d) ** 2
    wc2 = abs(params.omega_c) ** 2
    dd, dc = params.delta_d, params.delta_c
    m = wd2 * (1 + 4 * dc**2) + wc2 * (1 + 4 * dd**2) + 4 * wd2 * wc2
    if m == 0.0:
        raise DegenerateInput("both Rabi frequencies vanish; the steady state is undetermined")
    both = wd2 * wc2
    pop11 = (wc2 * (1 + 4 * dd**2) + both) / m
    pop22 = (wd2 * (1 + 4 * dc**2) + both) / m
    pop33 = both / m
    coh13 = 1j * (1 + 2j * dd) * wc2 * params.omega_d / m
    coh24 = 1j * (1 + 2j * dc) * wd2 * params.omega_c / m
    return SteadyState(pop11, pop22, pop33, pop33, complex(coh13), complex(coh24), m)
