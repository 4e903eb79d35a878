"""Shared, cached simulations so expensive runs happen once per session."""

import dataclasses
import functools

from sfwm import PRESETS, GridSpec, SystemParams, build_wavepacket, simulate, summarize
from sfwm.params import family_member

SMALL = GridSpec(-40.0, 40.0, 4096, 32, 4)


@functools.lru_cache(maxsize=None)
def run(params: SystemParams, grid: GridSpec | None = None):
    sim = simulate(params, grid)
    wave = build_wavepacket(sim)
    summary = summarize(sim, wave)
    # the noise kernels dominate memory (hundreds of MB); keep the rest
    return dataclasses.replace(sim, kernels=None), wave, summary


def preset(name: str, grid: GridSpec | None = None):
    return run(PRESETS[name], grid)


def member(od, wc, dd, grid: GridSpec | None = None):
    return run(family_member(od, wc, dd), grid)
