"""Fourier analysis of observable time series.

Frequencies are angular throughout. Peaks are labeled by integer pairs
``(k1, k2)`` meaning the combination ``(k1/2) f_L + (k2/2) f_R`` of the two
drive frequencies, so ``(1, 1)`` is the half-sum and ``(-1, 1)`` the
half-difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy import stats

from .errors import SamplingError, ValidationError, WindowingError

MIN_SAMPLES = 64
DEFAULT_FLOOR = 5.0
DEFAULT_K_MAX = 4
LIFETIME_WINDOW_PERIODS = 50
LIFETIME_HOP_PERIODS = 10
MIN_FIT_R2 = 0.5
LOCAL_WIDTH = 0.5
# bins below this fraction of the largest bin are rounding noise
ROUNDOFF_FLOOR = 1e-9
# worst-case loss of a tone between two bins (half-bin offset)
_SCALLOP = {"rectangular": 2 / np.pi, "hann": 8 / (3 * np.pi)}


@dataclass(frozen=True, eq=False)
class Spectrum:
    angular_frequencies: np.ndarray
    amplitudes: np.ndarray
    resolution: float
    sample_dt: float
    window: str = "rectangular"
    # windowed, mean-removed samples and the window sum; used to evaluate the
    # transform between grid points
    signal: np.ndarray = field(default=None, repr=False)
    gain: float = 1.0

    def __len__(self):
        return self.amplitudes.size

    def amplitude_at(self, omega: float) -> float:
        """Amplitude of the transform evaluated exactly at ``omega``."""
        t = np.arange(self.signal.size) * self.sample_dt
        return float(2.0 / self.gain * abs(np.exp(-1j * omega * t) @ self.signal))

    def bin_of(self, omega: float) -> int:
        return int(round(omega / self.resolution))

    def max_near(self, omega: float, bins: int = 1) -> float:
        k = self.bin_of(omega)
        lo, hi = max(k - bins, 0), min(k + bins + 1, self.amplitudes.size)
        return float(self.amplitudes[lo:hi].max()) if hi > lo else 0.0

    def local_contrast(self, omega: float, amplitude: float,
                       width: float = LOCAL_WIDTH) -> float:
        """``amplitude`` over the median amplitude within ``width`` of ``omega``.

        Finite-size fluctuations fill the low-frequency band with a forest of
        small peaks; a genuine response line stands well above its
        neighbourhood even when the global median is tiny.
        """
        near = self.amplitudes[np.abs(self.angular_frequencies - omega) <= width]
        med = float(np.median(near)) if near.size else 0.0
        return amplitude / med if med > 0 else math.inf


def check_uniform(times, sample_dt=None, rtol=1e-9) -> float:
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise SamplingError("need at least two sample times")
    steps = np.diff(times)
    dt = float(steps.mean()) if sample_dt is None else float(sample_dt)
    if dt <= 0 or np.abs(steps - dt).max() > rtol * max(1.0, abs(times[-1])):
        raise SamplingError("time grid is not uniform")
    return dt


def _window(kind: str, n: int) -> np.ndarray:
    if kind == "rectangular":
        return np.ones(n)
    if kind == "hann":
        return np.hanning(n)
    raise ValidationError(f"unknown window {kind!r}; use 'rectangular' or 'hann'")


def fourier_spectrum(series, sample_dt: float | None = None, window: str = "rectangular",
                     *, times=None) -> Spectrum:
    """One-sided amplitude spectrum of a uniformly sampled real series.

    The mean is removed first. ``A = 2 |X_j| / sum(w)``, so a tone
    ``a cos(w t)`` centred on a bin reads ``a``. Pass either ``sample_dt`` or
    the sample ``times`` (checked for uniformity).
    """
    x = np.asarray(series, dtype=float)
    if times is not None:
        sample_dt = check_uniform(times, sample_dt)
    if sample_dt is None or not sample_dt > 0:
        raise SamplingError("a positive sample_dt (or uniform times) is required")
    if x.ndim != 1 or x.size < MIN_SAMPLES:
        raise SamplingError(f"need a 1-D series with at least {MIN_SAMPLES} samples, got {x.shape}")
    w = _window(window, x.size)
    signal = (x - x.mean()) * w
    gain = float(w.sum())
    amps = 2.0 / gain * np.abs(np.fft.rfft(signal))
    omegas = 2 * np.pi * np.fft.rfftfreq(x.size, sample_dt)
    signal.flags.writeable = False
    return Spectrum(omegas, amps, 2 * np.pi / (x.size * sample_dt), float(sample_dt),
                    window, signal, gain)


def spectral_power(spec: Spectrum) -> float:
    """Mean-removed signal power recovered from a rectangular-window spectrum.

    Interior bins contribute ``A^2 / 2``; the zero and (even-length) Nyquist
    bins are unpaired and contribute ``A^2 / 4``.
    """
    a2 = spec.amplitudes ** 2
    n = spec.signal.size
    total = a2[0] / 4.0 + a2[1:].sum() / 2.0
    if n % 2 == 0:
        total -= a2[-1] / 4.0
    return float(total)


@dataclass(frozen=True)
class Peak:
    omega: float
    amplitude: float
    resolution: float


def detect_peaks(spec: Spectrum, floor_factor: float = DEFAULT_FLOOR) -> list[Peak]:
    """Local maxima above ``floor_factor * median(A)``, largest first.

    Each maximum is refined below the bin spacing by fitting a parabola to the
    log-amplitudes of the bin and its two neighbours; the amplitude is then
    the transform evaluated at the refined frequency, kept between the bin
    value and the bin value divided by the window's worst scalloping loss.
    """
    if not floor_factor > 1:
        raise ValidationError(f"floor_factor must be > 1, got {floor_factor}")
    a = spec.amplitudes
    if a.size < 3:
        return []
    floor = max(floor_factor * float(np.median(a)), ROUNDOFF_FLOOR * float(a.max()))
    mid = a[1:-1]
    is_max = (mid > a[:-2]) & (mid >= a[2:]) & (mid > floor)
    peaks = []
    for i in np.nonzero(is_max)[0] + 1:
        left, centre, right = a[i - 1], a[i], a[i + 1]
        offset = 0.0
        if left > 0 and right > 0:
            la, lb, lc = np.log([left, centre, right])
            denom = la - 2 * lb + lc
            if denom < 0:
                offset = float(np.clip(0.5 * (la - lc) / denom, -0.5, 0.5))
        omega = float(spec.angular_frequencies[i] + offset * spec.resolution)
        amp = float(centre)
        if spec.signal is not None:
            ceiling = centre / _SCALLOP.get(spec.window, 0.5)
            amp = min(max(amp, spec.amplitude_at(omega)), ceiling)
        peaks.append(Peak(omega, amp, spec.resolution))
    peaks.sort(key=lambda p: -p.amplitude)
    return peaks


@dataclass(frozen=True)
class LabeledPeak:
    omega: float
    amplitude: float
    k1: int | None
    k2: int | None
    residual: float | None
    fit: LifetimeFit | None = None

    @property
    def labeled(self) -> bool:
        return self.k1 is not None

    @property
    def label(self) -> tuple | None:
        return None if self.k1 is None else (self.k1, self.k2)

    @property
    def half_integer(self) -> bool:
        return self.labeled and (self.k1 % 2 != 0 or self.k2 % 2 != 0)

    def label_text(self) -> str:
        if not self.labeled:
            return "-"
        return f"({Fraction(self.k1, 2)}, {Fraction(self.k2, 2)})"


def predicted_frequency(k1, k2, f_left, f_right) -> float:
    return 0.5 * k1 * f_left + 0.5 * k2 * f_right


def _label_table(f_left, f_right, k_max):
    ks = np.arange(-k_max, k_max + 1)
    k1, k2 = np.meshgrid(ks, ks, indexing="ij")
    k1, k2 = k1.ravel(), k2.ravel()
    pred = 0.5 * k1 * f_left + 0.5 * k2 * f_right
    keep = pred > 0
    return k1[keep], k2[keep], pred[keep]


def label_peaks(peaks, f_left: float, f_right: float, k_max: int = DEFAULT_K_MAX,
                tol: float | None = None) -> list[LabeledPeak]:
    """Attach the nearest ``(k1, k2)`` with ``|k| <= k_max`` to every peak.

    A label is assigned when the distance to the predicted frequency is at most
    ``tol`` (default: each peak's frequency resolution). Equal distances are
    resolved toward smaller ``|k1| + |k2|``, then smaller ``|k2|``. Unmatched
    peaks keep a ``None`` label.
    """
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    k1, k2, pred = _label_table(f_left, f_right, k_max)
    order_cost = np.abs(k1) + np.abs(k2)
    out = []
    for p in peaks:
        limit = p.resolution if tol is None else tol
        resid = np.abs(p.omega - pred)
        best = resid.min() if resid.size else math.inf
        if best > limit:
            out.append(LabeledPeak(p.omega, p.amplitude, None, None, None))
            continue
        tied = np.nonzero(resid <= best + 1e-12 * max(1.0, abs(p.omega)))[0]
        j = min(tied, key=lambda t: (order_cost[t], abs(k2[t]), k1[t]))
        out.append(LabeledPeak(p.omega, p.amplitude, int(k1[j]), int(k2[j]), float(resid[j])))
    return out


def find_label(labeled, k1, k2) -> LabeledPeak | None:
    """Strongest peak carrying label ``(k1, k2)``, or None."""
    for p in labeled:
        if p.k1 == k1 and p.k2 == k2:
            return p
    return None


# -- lifetimes ----------------------------------------------------------------

@dataclass(frozen=True)
class LifetimeFit:
    """Exponential envelope fit of one spectral component.

    ``tau`` is the point estimate (``inf`` when the fitted slope is not
    negative); ``tau_lower`` is the lower end of its 95% confidence interval.
    ``status`` is ``"decaying"`` for a clean fit (R^2 >= 0.5, tau > 0),
    ``"non_decaying"`` when a decay cannot be distinguished from zero, and
    ``"unresolvable"`` for a poor fit with a clearly negative slope.
    """

    omega: float
    tau: float
    amplitude: float
    r2: float
    tau_lower: float
    status: str
    n_windows: int

    def exceeds(self, threshold: float) -> bool:
        """True when the lifetime is longer than ``threshold`` at 95% confidence."""
        return self.tau_lower > threshold


def default_lifetime_windows(period_left: float, duration: float) -> tuple[float, float]:
    """Window ``50 T_L`` and hop ``10 T_L``, shortened for runs that cannot
    hold three windows (low drive frequency)."""
    window = min(LIFETIME_WINDOW_PERIODS * period_left, duration / 3.0)
    hop = min(LIFETIME_HOP_PERIODS * period_left, window / 5.0)
    return window, hop


def windowed_amplitudes(series, sample_dt, omega, window_length, hop):
    """Centres and single-frequency amplitudes of sliding windows."""
    x = np.asarray(series, dtype=float)
    n = int(round(window_length / sample_dt))
    step = max(1, int(round(hop / sample_dt)))
    starts = np.arange(0, x.size - n + 1, step)
    t = np.arange(n) * sample_dt
    kernel = np.exp(-1j * omega * t)
    amps = np.empty(starts.size)
    for k, s in enumerate(starts):
        seg = x[s:s + n]
        amps[k] = 2.0 / n * abs(kernel @ (seg - seg.mean()))
    centres = (starts + (n - 1) / 2.0) * sample_dt
    return centres, amps


def component_lifetime(series, sample_dt: float, omega: float, window_length: float,
                       hop: float) -> LifetimeFit:
    """Lifetime of the component at ``omega`` from the decay of its sliding
    window amplitude: ``ln a(t) = ln A - t / tau``."""
    x = np.asarray(series, dtype=float)
    duration = x.size * sample_dt
    if not omega > 0:
        raise WindowingError(f"omega must be positive, got {omega}")
    if window_length < 4 * 2 * np.pi / omega * (1 - 1e-9):
        raise WindowingError(
            f"window {window_length:.4g} shorter than four periods of omega={omega:.4g}")
    if duration < 3 * window_length * (1 - 1e-9):
        raise WindowingError(
            f"series duration {duration:.4g} shorter than three windows of {window_length:.4g}")
    if not hop > 0:
        raise WindowingError("hop must be positive")
    centres, amps = windowed_amplitudes(x, sample_dt, omega, window_length, hop)
    if centres.size < 3:
        raise WindowingError("fewer than three windows fit in the series")
    tiny = np.finfo(float).tiny
    fit = stats.linregress(centres, np.log(np.maximum(amps, tiny)))
    slope, se = float(fit.slope), float(fit.stderr)
    r2 = float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else 0.0
    tq = float(stats.t.ppf(0.975, centres.size - 2))
    steepest = slope - tq * se
    tau = -1.0 / slope if slope < 0 else math.inf
    tau_lower = -1.0 / steepest if steepest < 0 else math.inf
    if slope < 0 and r2 >= MIN_FIT_R2:
        status = "decaying"
    elif slope + tq * se >= 0:
        status = "non_decaying"
    else:
        status = "unresolvable"
    return LifetimeFit(float(omega), tau, float(math.exp(fit.intercept)), r2,
                       tau_lower, status, int(centres.size))


# -- one-call pipeline ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralAnalysis:
    spectrum: Spectrum
    peaks: list
    f_left: float
    f_right: float

    def find(self, k1, k2):
        return find_label(self.peaks, k1, k2)

    def top(self, n):
        return self.peaks[:n]

    def resolved(self, floor_factor=DEFAULT_FLOOR):
        """Peaks standing more than ``floor_factor`` above their local median."""
        spec = self.spectrum
        return [p for p in self.peaks
                if spec.local_contrast(p.omega, p.amplitude) > floor_factor]


def analyze(series, sample_dt, f_left, f_right, *, window="rectangular",
            floor_factor=DEFAULT_FLOOR, k_max=DEFAULT_K_MAX, tol=None,
            lifetimes=None, period_left=None) -> SpectralAnalysis:
    """Spectrum, detected and labeled peaks, and optionally lifetimes.

    ``lifetimes`` is a collection of ``(k1, k2)`` labels whose strongest peak
    gets a :class:`LifetimeFit` (``"all"`` fits every labeled peak). Windows
    follow :func:`default_lifetime_windows` with ``period_left`` (default
    ``2 pi / f_left``).
    """
    spec = fourier_spectrum(series, sample_dt, window)
    labeled = label_peaks(detect_peaks(spec, floor_factor), f_left, f_right, k_max, tol)
    if lifetimes:
        period = 2 * np.pi / f_left if period_left is None else period_left
        window_len, hop = default_lifetime_windows(period, len(series) * sample_dt)
        done = set()
        for i, p in enumerate(labeled):
            if not p.labeled or p.label in done:
                continue
            if lifetimes != "all" and p.label not in lifetimes:
                continue
            done.add(p.label)
            try:
                fit = component_lifetime(series, sample_dt, p.omega, window_len, hop)
            except WindowingError:
                continue
            labeled[i] = replace(p, fit=fit)
    return SpectralAnalysis(spec, labeled, float(f_left), float(f_right))
