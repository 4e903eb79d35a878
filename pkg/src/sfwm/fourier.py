"""Frequency-to-delay transforms shared by the numerical and analytic paths."""

from __future__ import annotations

import math

import numpy as np


def to_delay_domain(omega: np.ndarray, values: np.ndarray, pad: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """f(tau) = int d omega/2 pi exp(-i omega tau) values(omega), by FFT.

    ``omega`` must be uniform. The result is sorted by delay and spans
    [-pi/dw, pi/dw) with spacing 2 pi / (pad * n * dw).
    """
    n = len(omega)
    dw = float(omega[1] - omega[0])
    padded = np.zeros(n * pad, dtype=complex)
    padded[:n] = values
    tau = np.fft.fftfreq(n * pad, d=dw / (2 * math.pi))
    f = np.fft.fft(padded) * dw / (2 * math.pi) * np.exp(-1j * omega[0] * tau)
    order = np.argsort(tau, kind="stable")
    return tau[order], f[order]
