import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtqc.errors import SamplingError, ValidationError, WindowingError
from dtqc.model import golden_chain
from dtqc.propagator import run
from dtqc.spectral import (
    LifetimeFit,
    Peak,
    analyze,
    check_uniform,
    component_lifetime,
    default_lifetime_windows,
    detect_peaks,
    fourier_spectrum,
    label_peaks,
    predicted_frequency,
    spectral_power,
)

DT = 0.05
F_L = 2 * math.pi / 4.74
F_R = F_L * (math.sqrt(5) + 1) / 2


def grid(duration, dt=DT):
    return np.arange(int(round(duration / dt))) * dt


def test_pure_tone():
    t = grid(500)
    spec = fourier_spectrum(np.cos(1.0 * t), DT)
    peaks = detect_peaks(spec)
    assert len(peaks) == 1
    assert abs(peaks[0].omega - 1.0) < spec.resolution / 4
    assert peaks[0].amplitude == pytest.approx(1.0, rel=0.05)
    assert spec.resolution == pytest.approx(2 * math.pi / 500)
    assert spec.angular_frequencies[-1] == pytest.approx(math.pi / DT)


def test_constant_series_is_flat():
    spec = fourier_spectrum(np.full(1000, 3.7), DT)
    assert np.all(spec.amplitudes < 1e-12)
    assert detect_peaks(spec) == []


def test_two_tones():
    t = grid(1000)
    spec = fourier_spectrum(0.3 * np.cos(0.41 * t) + 0.5 * np.cos(1.73 * t + 0.4), DT)
    peaks = detect_peaks(spec)
    assert len(peaks) == 2
    hi, lo = peaks
    assert abs(hi.omega - 1.73) < spec.resolution / 2
    assert abs(lo.omega - 0.41) < spec.resolution / 2
    assert lo.amplitude / hi.amplitude == pytest.approx(0.6, rel=0.1)


def test_white_noise_has_no_peaks():
    rng = np.random.default_rng(12345)
    assert detect_peaks(fourier_spectrum(rng.normal(size=20000), DT)) == []


@given(st.floats(0.3, 8.0), st.floats(0, 2 * math.pi), st.floats(0.1, 3.0))
@settings(max_examples=60, deadline=None)
def test_refinement_within_quarter_bin(omega, phase, amp):
    t = grid(500)
    spec = fourier_spectrum(amp * np.cos(omega * t + phase), DT)
    top = detect_peaks(spec)[0]
    assert abs(top.omega - omega) < spec.resolution / 4
    assert top.amplitude == pytest.approx(amp, rel=0.05)


def test_hann_window():
    t = grid(500)
    spec = fourier_spectrum(np.cos(2.2 * t), DT, "hann")
    top = detect_peaks(spec)[0]
    assert abs(top.omega - 2.2) < spec.resolution / 4
    assert top.amplitude == pytest.approx(1.0, rel=0.05)
    with pytest.raises(ValidationError):
        fourier_spectrum(np.cos(t), DT, "kaiser")


@pytest.mark.parametrize("seed", range(4))
def test_parseval(seed):
    rng = np.random.default_rng(seed)
    t = grid(400)
    x = sum(rng.uniform(0.1, 1) * np.cos(rng.uniform(0.1, 10) * t + rng.uniform(0, 6))
            for _ in range(5)) + 0.1 * rng.normal(size=t.size)
    spec = fourier_spectrum(x, DT)
    power = np.mean((x - x.mean()) ** 2)
    assert spectral_power(spec) == pytest.approx(power, rel=0.01)


def test_sampling_errors():
    with pytest.raises(SamplingError):
        fourier_spectrum(np.ones(10), DT)
    t = grid(100)
    t[50] += 0.01
    with pytest.raises(SamplingError):
        fourier_spectrum(np.cos(t), times=t)
    assert check_uniform(grid(100)) == pytest.approx(DT)
    with pytest.raises(SamplingError):
        fourier_spectrum(np.ones(100))


def test_floor_factor_validation():
    spec = fourier_spectrum(np.cos(grid(100)), DT)
    with pytest.raises(ValidationError):
        detect_peaks(spec, 1.0)


def test_labels_for_golden_preset():
    res = 2 * math.pi / 1000
    out = label_peaks([Peak(1.735, 1.0, res), Peak(0.4096, 1.0, res), Peak(F_L, 1.0, res),
                       Peak(7.777, 1.0, res)], F_L, F_R)
    assert [p.label for p in out] == [(1, 1), (-1, 1), (2, 0), None]
    assert out[0].label_text() == "(1/2, 1/2)"
    assert out[1].half_integer and not out[2].half_integer
    assert all(p.residual <= res for p in out[:3])


def test_label_tie_break():
    # f_R = 2 f_L makes (2, 0) and (0, 1) coincide: the smaller |k| sum wins,
    # then the smaller |k2|
    out = label_peaks([Peak(1.0, 1.0, 0.01)], 1.0, 2.0)
    assert out[0].label == (0, 1)
    # 2.0 = (4, 0) = (2, 1) = (0, 2): |k| sums 4, 3, 2
    out = label_peaks([Peak(2.0, 1.0, 0.01)], 1.0, 2.0)
    assert out[0].label == (0, 2)


def test_label_validation():
    with pytest.raises(ValidationError):
        label_peaks([], 1.0, 1.6, k_max=0)


@given(st.integers(-4, 4), st.integers(-4, 4), st.floats(0.5, 4.0))
@settings(max_examples=60, deadline=None)
def test_labeling_scale_consistent(k1, k2, scale):
    omega = predicted_frequency(k1, k2, F_L, F_R)
    if omega <= 1e-3:
        return
    res = 1e-4
    base = label_peaks([Peak(omega, 1.0, res)], F_L, F_R)[0]
    scaled = label_peaks([Peak(scale * omega, 1.0, scale * res)], scale * F_L, scale * F_R)[0]
    assert base.label == scaled.label
    # the golden ratio is irrational, so the exact combination is the unique match
    assert base.label == (k1, k2)


def test_damped_lifetime():
    t = grid(1000)
    x = np.exp(-t / 200) * np.cos(1.7 * t)
    fit = component_lifetime(x, DT, 1.7, 50.0, 10.0)
    assert fit.tau == pytest.approx(200, rel=0.1)
    assert fit.status == "decaying" and fit.r2 > 0.99
    assert fit.tau_lower <= fit.tau


def test_undamped_is_non_decaying():
    t = grid(1000)
    fit = component_lifetime(np.cos(1.7 * t), DT, 1.7, 50.0, 10.0)
    assert fit.status == "non_decaying"
    assert fit.exceeds(30 * 4.74)


def test_threshold_behaviour_at_boundary():
    # tau exactly 30 T_L: the point estimate sits on the threshold, so the
    # lower confidence bound is below it and the component does not qualify
    t_l = 4.74
    t = grid(1000)
    x = np.exp(-t / (30 * t_l)) * np.cos(1.7 * t)
    window, hop = default_lifetime_windows(t_l, 1000.0)
    fit = component_lifetime(x, DT, 1.7, window, hop)
    assert fit.tau == pytest.approx(30 * t_l, rel=0.02)
    assert not fit.exceeds(30 * t_l)
    slower = component_lifetime(np.exp(-t / (300 * t_l)) * np.cos(1.7 * t), DT, 1.7, window, hop)
    assert slower.exceeds(30 * t_l)


def test_windowing_errors():
    x = np.cos(1.7 * grid(1000))
    with pytest.raises(WindowingError):
        component_lifetime(x, DT, 1.7, 10.0, 5.0)      # < 4 periods
    with pytest.raises(WindowingError):
        component_lifetime(x, DT, 1.7, 400.0, 10.0)    # < 3 windows
    with pytest.raises(WindowingError):
        component_lifetime(x, DT, 1.7, 50.0, 0.0)


def test_default_windows():
    assert default_lifetime_windows(4.74, 1000.0) == pytest.approx((237.0, 47.4))
    w, h = default_lifetime_windows(10.0, 1000.0)
    assert w == pytest.approx(1000 / 3) and h == pytest.approx(w / 5)


def test_convention_does_not_move_peaks():
    traj = run(golden_chain(10), 1000.0, DT, ("m", "m_density"))
    a = detect_peaks(fourier_spectrum(traj["m"], DT))
    b = detect_peaks(fourier_spectrum(traj["m_density"], DT))
    assert [p.omega for p in a] == pytest.approx([p.omega for p in b], abs=1e-9)
    assert [p.amplitude for p in a] == pytest.approx([2 * p.amplitude for p in b], rel=1e-9)


def test_analyze_attaches_lifetimes():
    traj = run(golden_chain(10), 1000.0, DT, ("m",))
    res = analyze(traj["m"], DT, F_L, F_R, lifetimes={(1, 1)})
    pp = res.find(1, 1)
    assert isinstance(pp.fit, LifetimeFit)
    assert all(p.fit is None for p in res.peaks if p.label != (1, 1))


def test_resolved_peaks_need_local_contrast():
    # a strong line on top of a dense forest of weak lines: every line is
    # detected against the global median, most of the forest is not resolved
    t = grid(1000)
    rng = np.random.default_rng(0)
    forest = sum(0.01 * np.cos(w * t + rng.uniform(0, 6)) for w in rng.uniform(0.05, 2.0, 200))
    res = analyze(forest + 0.3 * np.cos(1.0 * t), DT, F_L, F_R)
    assert len(res.peaks) > 20
    strong = res.resolved()
    assert abs(strong[0].omega - 1.0) < res.spectrum.resolution
    assert len(strong) < len(res.peaks) / 5
