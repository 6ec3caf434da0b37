"""Named parameter sets, one per figure-style study.

A preset is a list of jobs; :mod:`dtqc.cli` runs them and writes their
outputs into one directory. ``-small`` variants are desk-scale versions of
the large sweeps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NamingError
from .model import ChainParameters, golden_chain, uniform_chain
from .sweep import GridSpec

T_LEFT = 4.74


@dataclass(frozen=True)
class EvolveJob:
    name: str
    params: ChainParameters
    t_max: float = 1000.0
    sample_dt: float = 0.05
    observables: tuple = ("m", "fidelity", "entropy")
    densities: bool = False
    spectra: tuple = ()          # columns to Fourier-analyze


@dataclass(frozen=True)
class HeatmapJob:
    name: str
    params: ChainParameters
    t_max: float
    sample_dt: float = 0.05


@dataclass(frozen=True)
class PhaseJob:
    name: str
    grid: GridSpec


@dataclass(frozen=True)
class SizeScanJob:
    name: str
    sizes: tuple
    period_left: float
    observable: str
    t_max: float
    theta: float = math.pi


@dataclass(frozen=True)
class FrequencyScanJob:
    name: str
    f_left_values: tuple
    observable: str = "m"
    theta: float = math.pi
    n_sites: int = 10
    t_max: float = 1000.0


@dataclass(frozen=True)
class StateScanJob:
    name: str
    theta_values: tuple
    initial_states: tuple = ("Z2", "Z3", "ground")
    n_sites: int = 12
    period_left: float = T_LEFT
    t_max: float = 500.0


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    jobs: tuple = field(default_factory=tuple)


def _span(start, stop, step):
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(v) for v in np.round(start + step * np.arange(count), 12))


FULL_THETA = _span(2.0, 4.5, 0.05)
FULL_F_LEFT = _span(0.5, 3.5, 0.05)
DESK_THETA = (2.4, 2.8, math.pi, 3.4, 3.8)
DESK_F_LEFT = (0.6, 1.0, 1.33, 1.8, 2.6, 3.3)
SCAN_F_LEFT = (0.4, 0.7, 1.0, 1.33, 1.6, 2.0, 2.32, 2.6, 3.0, 3.3)


def _build() -> dict:
    g10 = golden_chain(10)
    presets = [
        Preset("fig1b", "m, fidelity and entropy of the golden-ratio chain, N=10, t=1000",
               (EvolveJob("fig1b", g10, densities=True),)),
        Preset("fig1c", "labeled spectrum of m for the golden-ratio chain, N=10, t=1000",
               (EvolveJob("fig1c", g10, observables=("m", "m_signed"), spectra=("m",)),)),
        Preset("fig1d", "basis-overlap heatmap, N=9 split 5|4, four left periods",
               (HeatmapJob("fig1d", golden_chain(9, n_left=5), t_max=4 * T_LEFT),)),
        Preset("fig2", "phase diagram of m over theta in [2, 4.5] x f_L in [0.5, 3.5], N=10",
               (PhaseJob("fig2", GridSpec(FULL_THETA, FULL_F_LEFT, observable="m")),)),
        Preset("fig2-small", "5 x 6 desk phase diagram of m, N=10, t=1000",
               (PhaseJob("fig2-small", GridSpec(DESK_THETA, DESK_F_LEFT, observable="m")),)),
        Preset("fig2c", "m peak amplitudes versus N in {8, 10, 12, 14}",
               (SizeScanJob("fig2c", (8, 10, 12, 14), T_LEFT, "m", 1000.0),)),
        Preset("fig2d", "labeled m spectra across drive frequencies at theta=pi",
               (FrequencyScanJob("fig2d", SCAN_F_LEFT),)),
        Preset("fig3", "fidelity and its spectrum at T_L=2.32, t=500, plus size scaling",
               (EvolveJob("fig3", golden_chain(10, period_left=2.32), t_max=500.0,
                          spectra=("fidelity",)),
                SizeScanJob("fig3-scaling", (8, 10, 12, 14), 2.32, "fidelity", 500.0))),
        Preset("fig4", "entropy dynamics and spectra at f_L in {1.00, 2.32, 3.34}, t=500",
               tuple(EvolveJob(f"fig4-f{f:.2f}", golden_chain(10, period_left=2 * math.pi / f),
                               t_max=500.0, spectra=("entropy", "fidelity"))
                     for f in (1.0, 2.32, 3.34))),
        Preset("fig5a", "uniform couplings, no drive, N=10",
               (EvolveJob("fig5a", uniform_chain(10, theta=0.0),
                          observables=("m", "m_signed", "fidelity"), spectra=("m_signed",)),)),
        Preset("fig5b", "uniform couplings, single kick train T=4.74, theta=pi (DTC), N=10",
               (EvolveJob("fig5b", uniform_chain(10, period=T_LEFT),
                          observables=("m", "m_signed", "fidelity"), spectra=("m_signed",)),)),
        Preset("fig5c", "golden-ratio couplings, no drive, N=10",
               (EvolveJob("fig5c", golden_chain(10, theta=0.0),
                          observables=("m", "m_signed", "fidelity"), spectra=("m",)),)),
        Preset("fig5d", "golden-ratio couplings and drives, theta=pi (DTQC), N=10",
               (EvolveJob("fig5d", g10, observables=("m", "m_signed", "fidelity"),
                          spectra=("m",)),)),
        Preset("fig6", "half-integer peaks versus theta for Z2, Z3 and ground, N=12, t=500",
               (StateScanJob("fig6", _span(0.0, 2 * math.pi, math.pi / 8)),)),
        Preset("fig7", "phase diagram of fidelity, N=10, t=1000",
               (PhaseJob("fig7", GridSpec(FULL_THETA, FULL_F_LEFT, observable="fidelity")),)),
        Preset("fig7-small", "5 x 6 desk phase diagram of fidelity, N=10, t=1000",
               (PhaseJob("fig7-small", GridSpec(DESK_THETA, DESK_F_LEFT,
                                                observable="fidelity")),)),
    ]
    return {p.name: p for p in presets}


PRESETS = _build()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise NamingError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
