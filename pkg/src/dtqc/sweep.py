"""Parameter sweeps: phase diagrams, size and drive-frequency scans.

Each grid cell is an independent run. The eigendecomposition depends only on
``(N, N_L, Omega_L, Omega_R)`` and is computed once, before any worker starts,
then shared read-only. BLAS is pinned to one thread inside every cell so the
output does not depend on how cells are distributed over workers.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from .basis import enumerate_basis
from .errors import DTQCError, ValidationError
from .model import GOLDEN_RATIO, ChainParameters, build_pxp
from .propagator import DEFAULT_SAMPLE_DT, decompose, run
from .spectral import (
    DEFAULT_FLOOR,
    DEFAULT_K_MAX,
    analyze,
    predicted_frequency,
)

log = logging.getLogger(__name__)

DTQC_LIFETIME_PERIODS = 30
MINUS_PLUS = (-1, 1)   # (-1/2, 1/2)
PLUS_PLUS = (1, 1)     # (1/2, 1/2)
OBSERVABLE_SERIES = {"m": "m", "fidelity": "fidelity", "entropy": "entropy"}


def cell_parameters(n_sites, f_left, theta, *, omega_left=1.0, omega_ratio=GOLDEN_RATIO,
                    period_ratio=GOLDEN_RATIO, initial_state="Z2", n_left=None):
    period_left = 2 * math.pi / f_left
    return ChainParameters(
        n_sites=n_sites,
        n_left=n_sites // 2 if n_left is None else n_left,
        omega_left=omega_left,
        omega_right=omega_left * omega_ratio,
        period_left=period_left,
        period_right=period_left / period_ratio,
        theta_left=theta,
        theta_right=theta,
        initial_state=initial_state,
    )


@dataclass(frozen=True)
class GridSpec:
    theta_values: tuple
    f_left_values: tuple
    sizes: tuple = (10,)
    observable: str = "m"
    t_max: float = 1000.0
    sample_dt: float = DEFAULT_SAMPLE_DT
    omega_left: float = 1.0
    omega_ratio: float = GOLDEN_RATIO
    period_ratio: float = GOLDEN_RATIO
    initial_state: str = "Z2"
    floor_factor: float = DEFAULT_FLOOR
    k_max: int = DEFAULT_K_MAX

    def __post_init__(self):
        for name in ("theta_values", "f_left_values", "sizes"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValidationError(f"grid {name} is empty")
            object.__setattr__(self, name, values)
        if any(f <= 0 for f in self.f_left_values):
            raise ValidationError("drive frequencies must be positive")
        if self.observable not in OBSERVABLE_SERIES:
            raise ValidationError(f"observable must be one of {sorted(OBSERVABLE_SERIES)}")
        if not self.t_max > 0 or not self.sample_dt > 0:
            raise ValidationError("t_max and sample_dt must be positive")

    def cells(self):
        """(n_sites, theta, f_left) in output order: sizes, then theta rows,
        then f_left columns."""
        return [(n, th, f) for n in self.sizes for th in self.theta_values
                for f in self.f_left_values]

    def params(self, n_sites, theta, f_left) -> ChainParameters:
        return cell_parameters(n_sites, f_left, theta, omega_left=self.omega_left,
                               omega_ratio=self.omega_ratio, period_ratio=self.period_ratio,
                               initial_state=self.initial_state)


@dataclass
class PhaseCell:
    """One (theta, f_L) point. ``mm`` is the (-1/2, 1/2) line, ``pp`` the
    (1/2, 1/2) line.

    A line is *present* when peak detection found it and its amplitude is more
    than ``floor_factor`` times the local spectral median (``contrast``).
    Amplitudes are reported either way.
    """

    theta: float
    f_left: float
    n_sites: int
    amp_mm: float = math.nan
    amp_pp: float = math.nan
    fit_mm: object = None
    fit_pp: object = None
    present_mm: bool = False
    present_pp: bool = False
    contrast_mm: float = math.nan
    contrast_pp: float = math.nan
    is_dtqc: bool = False
    dominant: tuple = ()
    error: str = ""

    @property
    def period_left(self):
        return 2 * math.pi / self.f_left


def classify_dtqc(cell: PhaseCell, period_left: float | None = None) -> bool:
    """Both half-integer mixed peaks present and each confidently longer-lived
    than ``30 T_L``."""
    if period_left is None:
        period_left = cell.period_left
    threshold = DTQC_LIFETIME_PERIODS * period_left
    for present, fit in ((cell.present_mm, cell.fit_mm), (cell.present_pp, cell.fit_pp)):
        if not present or fit is None or not fit.exceeds(threshold):
            return False
    return True


# -- decomposition cache --------------------------------------------------------

_DECOMPOSITIONS: dict = {}


def get_decomposition(params: ChainParameters):
    key = params.hamiltonian_key()
    if key not in _DECOMPOSITIONS:
        basis = enumerate_basis(params.n_sites, params.n_left)
        _DECOMPOSITIONS[key] = decompose(build_pxp(basis, params))
    return _DECOMPOSITIONS[key]


def clear_cache():
    _DECOMPOSITIONS.clear()


def _init_worker(cache):
    _DECOMPOSITIONS.update(cache)


# -- single cell ----------------------------------------------------------------

def label_amplitude(analysis, label):
    """Amplitude of a labeled component and whether it was detected.

    When no detected peak carries the label the raw spectrum maximum within
    one bin of the predicted frequency is reported instead.
    """
    peak = analysis.find(*label)
    if peak is not None:
        return peak.amplitude, True, peak
    omega = predicted_frequency(*label, analysis.f_left, analysis.f_right)
    return analysis.spectrum.max_near(omega), False, None


def label_contrast(analysis, label, amplitude):
    omega = predicted_frequency(*label, analysis.f_left, analysis.f_right)
    return analysis.spectrum.local_contrast(omega, amplitude)


def analyze_series(series, sample_dt, params, *, floor_factor=DEFAULT_FLOOR,
                   k_max=DEFAULT_K_MAX, lifetimes=(MINUS_PLUS, PLUS_PLUS)):
    return analyze(series, sample_dt, params.f_left, params.f_right,
                   floor_factor=floor_factor, k_max=k_max, lifetimes=lifetimes,
                   period_left=params.period_left)


def evaluate_cell(params: ChainParameters, observable: str, t_max: float, sample_dt: float,
                  *, floor_factor=DEFAULT_FLOOR, k_max=DEFAULT_K_MAX, theta=None,
                  f_left=None) -> PhaseCell:
    cell = PhaseCell(params.theta_left if theta is None else theta,
                     params.f_left if f_left is None else f_left, params.n_sites)
    name = OBSERVABLE_SERIES[observable]
    traj = run(params, t_max, sample_dt, (name,), decomposition=get_decomposition(params))
    analysis = analyze_series(traj[name], sample_dt, params,
                              floor_factor=floor_factor, k_max=k_max)
    cell.amp_mm, detected_mm, peak_mm = label_amplitude(analysis, MINUS_PLUS)
    cell.amp_pp, detected_pp, peak_pp = label_amplitude(analysis, PLUS_PLUS)
    cell.contrast_mm = label_contrast(analysis, MINUS_PLUS, cell.amp_mm)
    cell.contrast_pp = label_contrast(analysis, PLUS_PLUS, cell.amp_pp)
    # a detected line must also stand out of its own neighbourhood
    cell.present_mm = detected_mm and cell.contrast_mm > floor_factor
    cell.present_pp = detected_pp and cell.contrast_pp > floor_factor
    cell.fit_mm = peak_mm.fit if peak_mm is not None else None
    cell.fit_pp = peak_pp.fit if peak_pp is not None else None
    cell.dominant = tuple(p.label for p in analysis.peaks if p.labeled)[:3]
    cell.is_dtqc = classify_dtqc(cell, params.period_left)
    return cell


def _cell_task(args):
    grid, n, theta, f_left = args
    params = None
    try:
        params = grid.params(n, theta, f_left)
        with threadpool_limits(1):
            return evaluate_cell(params, grid.observable, grid.t_max, grid.sample_dt,
                                 floor_factor=grid.floor_factor, k_max=grid.k_max,
                                 theta=theta, f_left=f_left)
    except (DTQCError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        log.warning("cell theta=%s f_L=%s N=%s failed: %s", theta, f_left, n, exc)
        return PhaseCell(theta, f_left, n, error=f"{type(exc).__name__}: {exc}")


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity")
               else (os.cpu_count() or 1))


def run_phase_diagram(grid: GridSpec, workers: int | None = 1) -> list[PhaseCell]:
    """Evaluate every (N, theta, f_L) cell of the grid.

    Output order is fixed by :meth:`GridSpec.cells` whatever the worker count.
    Failing cells carry an ``error`` string and never abort the sweep.
    """
    tasks = [(grid, n, th, f) for n, th, f in grid.cells()]
    with threadpool_limits(1):
        for n in grid.sizes:
            try:
                get_decomposition(grid.params(n, grid.theta_values[0], grid.f_left_values[0]))
            except DTQCError as exc:
                log.warning("warm-up for N=%s failed: %s", n, exc)
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or len(tasks) == 1:
        return [_cell_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(dict(_DECOMPOSITIONS),)) as pool:
        return list(pool.map(_cell_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# -- scans ------------------------------------------------------------------------

@dataclass
class SizeRow:
    n_sites: int
    amp_mm: float
    amp_pp: float
    present_mm: bool
    present_pp: bool


@dataclass
class ExponentialFit:
    """``ln A = intercept + slope * N``."""

    slope: float
    intercept: float
    r2: float


@dataclass
class SizeScan:
    observable: str
    rows: list
    fits: dict = field(default_factory=dict)

    def amplitudes(self, label):
        attr = "amp_mm" if tuple(label) == MINUS_PLUS else "amp_pp"
        return np.array([getattr(r, attr) for r in self.rows])

    @property
    def sizes(self):
        return np.array([r.n_sites for r in self.rows])


def _exp_fit(sizes, amps):
    if len(sizes) < 3 or np.any(amps <= 0):
        return ExponentialFit(math.nan, math.nan, math.nan)
    fit = stats.linregress(sizes, np.log(amps))
    return ExponentialFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2))


def size_scan(sizes, preset, observable="m", *, t_max=1000.0, sample_dt=DEFAULT_SAMPLE_DT,
              floor_factor=DEFAULT_FLOOR, k_max=DEFAULT_K_MAX) -> SizeScan:
    """Amplitudes of the (-1/2, 1/2) and (1/2, 1/2) components versus N.

    ``preset`` maps ``n_sites`` to :class:`ChainParameters` (for example
    ``functools.partial(golden_chain, period_left=4.74)``). An exponential fit
    of ``ln A`` against N is attached for each label.
    """
    name = OBSERVABLE_SERIES[observable]
    rows = []
    for n in sizes:
        params = preset(n)
        traj = run(params, t_max, sample_dt, (name,), decomposition=get_decomposition(params))
        analysis = analyze_series(traj[name], sample_dt, params, floor_factor=floor_factor,
                                  k_max=k_max, lifetimes=None)
        a_mm, p_mm, _ = label_amplitude(analysis, MINUS_PLUS)
        a_pp, p_pp, _ = label_amplitude(analysis, PLUS_PLUS)
        rows.append(SizeRow(int(n), a_mm, a_pp, p_mm, p_pp))
    scan = SizeScan(observable, rows)
    for label in (MINUS_PLUS, PLUS_PLUS):
        scan.fits[label] = _exp_fit(scan.sizes, scan.amplitudes(label))
    return scan


@dataclass
class FrequencyRow:
    f_left: float
    analysis: object

    def dominant(self, n=3):
        return [p.label for p in self.analysis.peaks[:n]]


def frequency_scan(f_left_values, theta=math.pi, observable="m", *, n_sites=10,
                   t_max=1000.0, sample_dt=DEFAULT_SAMPLE_DT, omega_left=1.0,
                   floor_factor=DEFAULT_FLOOR, k_max=DEFAULT_K_MAX) -> list[FrequencyRow]:
    """Labeled spectra of one observable across drive frequencies."""
    name = OBSERVABLE_SERIES[observable]
    out = []
    for f in f_left_values:
        params = cell_parameters(n_sites, f, theta, omega_left=omega_left)
        traj = run(params, t_max, sample_dt, (name,), decomposition=get_decomposition(params))
        out.append(FrequencyRow(float(f), analyze_series(
            traj[name], sample_dt, params, floor_factor=floor_factor, k_max=k_max,
            lifetimes=None)))
    return out


@dataclass
class InitialStateRow:
    initial_state: str
    theta: float
    observable: str
    amp_mm: float
    amp_pp: float


def initial_state_scan(theta_values, initial_states=("Z2", "Z3", "ground"), *, n_sites=12,
                       period_left=4.74, t_max=500.0, sample_dt=DEFAULT_SAMPLE_DT,
                       observables=("m", "fidelity")) -> list[InitialStateRow]:
    """Half-integer mixed peak amplitudes versus kick strength for several
    initial product states."""
    rows = []
    for state in initial_states:
        for theta in theta_values:
            params = cell_parameters(n_sites, 2 * math.pi / period_left, theta,
                                     initial_state=state)
            names = tuple(OBSERVABLE_SERIES[o] for o in observables)
            traj = run(params, t_max, sample_dt, names, decomposition=get_decomposition(params))
            for obs, name in zip(observables, names):
                analysis = analyze_series(traj[name], sample_dt, params, lifetimes=None)
                a_mm, _, _ = label_amplitude(analysis, MINUS_PLUS)
                a_pp, _, _ = label_amplitude(analysis, PLUS_PLUS)
                rows.append(InitialStateRow(state, float(theta), obs, a_mm, a_pp))
    return rows
