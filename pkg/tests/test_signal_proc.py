import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import signal

from inertia_scope.errors import ConfigError, WindowError
from inertia_scope.signal_proc import (
    EventDetectorSpec,
    FilterSpec,
    butterworth_lowpass,
    detect_events,
    dump_filter_coefficients,
    filter_coefficients,
    fit_rocof,
    raw_rocof,
)
from inertia_scope.swing_sim import FrequencyTrace

RATE = 50.0


def trace_of(*rows, rate=RATE, t0=0.0):
    return FrequencyTrace(t0, rate, np.vstack(rows), tuple(range(1, len(rows) + 1)))


def test_dc_passes_both_modes():
    x = np.full(500, 59.97)
    for zp in (True, False):
        y = butterworth_lowpass(trace_of(x), FilterSpec(zero_phase=zp)).values[0]
        np.testing.assert_allclose(y, x, atol=1e-9)


def test_coefficients_match_bilinear_design():
    b, a = filter_coefficients(FilterSpec(0.5, 2), RATE)
    w, h = signal.freqz(b, a, worN=[0.0, 0.5], fs=RATE)
    assert abs(h[0]) == pytest.approx(1.0)
    assert 20 * np.log10(abs(h[1])) == pytest.approx(-3.0103, abs=0.02)


def test_zero_phase_squares_the_magnitude():
    n = 5000
    t = np.arange(n) / RATE
    x = np.sin(2 * np.pi * 0.5 * t)
    y = butterworth_lowpass(trace_of(x), FilterSpec(0.5, 2, True)).values[0]
    mid = slice(1000, 4000)
    assert np.std(y[mid]) / np.std(x[mid]) == pytest.approx(0.5, abs=0.01)


def test_corner_above_nyquist_rejected():
    with pytest.raises(ConfigError):
        filter_coefficients(FilterSpec(30.0, 2), RATE)
    with pytest.raises(ConfigError):
        FilterSpec(order=0)


def test_coefficient_dump(tmp_path):
    p = dump_filter_coefficients(FilterSpec(), RATE, tmp_path / "c.txt")
    lines = p.read_text().splitlines()
    assert lines[0].startswith("# butterworth") and lines[1].startswith("b = ")
    b = np.array(lines[1][4:].split(), dtype=float)
    np.testing.assert_array_equal(b, filter_coefficients(FilterSpec(), RATE)[0])


def _step(n=600, at=300, size=-0.05, sigma=0.0, seed=0):
    x = np.full(n, 60.0)
    x[at:] += size
    return x + np.random.default_rng(seed).normal(0, sigma, n) if sigma else x


def test_detects_step_at_its_sample():
    assert detect_events(trace_of(_step())) == [pytest.approx(6.0)]


def test_quiet_record_has_no_events():
    assert detect_events(trace_of(_step(size=1e-9, sigma=1e-3, seed=4))) == []


@given(st.integers(0, 2**31 - 1))
def test_no_phantoms_at_twenty_sigma(seed):
    x = _step(n=1500, at=700, size=-0.06, sigma=1e-3, seed=seed)
    hits = detect_events(trace_of(x), EventDetectorSpec(deadband_hz=0.02, min_separation=30.0))
    assert hits == [pytest.approx(14.0)]


def test_min_separation_merges_bursts():
    x = _step(n=2000, at=300)
    x[400:] -= 0.05
    assert len(detect_events(trace_of(x), EventDetectorSpec(min_separation=5.0))) == 1
    assert len(detect_events(trace_of(x), EventDetectorSpec(min_separation=1.0))) == 2


def test_ramp_detection_lag_follows_deadband():
    t = np.arange(1000) / RATE
    x = 60.0 - 0.1 * np.clip(t - 5.0, 0, None)
    (T0,) = detect_events(trace_of(x), EventDetectorSpec(deadband_hz=0.02, min_separation=100.0))
    # against a 1 s trailing mean the ramp shows 0.1 tau - 0.05 tau^2, which reaches 0.02 at tau = 0.2254
    tau = (0.1 - np.sqrt(0.1**2 - 4 * 0.05 * 0.02)) / (2 * 0.05)
    assert T0 == pytest.approx(5.0 + np.ceil(tau * RATE) / RATE)


@given(
    c=st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=4),
    T0=st.floats(1.0, 3.0),
)
def test_fit_is_exact_on_polynomials(c, T0):
    t = np.arange(400) / RATE
    s = t - (T0 + 0.1)
    y = 60.0 + sum(ci * s**i for i, ci in enumerate(c))
    est = fit_rocof(trace_of(y), 1, T0, t_d=0.1, fit_window=0.5, degree=len(c) - 1)
    assert est.value == pytest.approx(c[1], abs=1e-9)


def test_fit_on_exponential(frozen):
    o = frozen["exponential"]
    t = np.arange(1000) / RATE
    s = np.clip(t - 2.0, 0, None)
    y = o["f0_hz"] - o["A_hz"] * (1 - np.exp(-s / o["tau_s"]))
    est = fit_rocof(trace_of(y), 1, 2.0, t_d=0.0, fit_window=0.5, degree=2)
    assert est.value == pytest.approx(o["slope_hzps"], rel=0.02)


def test_fit_window_errors():
    tr = trace_of(np.full(100, 60.0))
    with pytest.raises(WindowError):
        fit_rocof(tr, 1, 1.8, t_d=0.1, fit_window=0.5)
    with pytest.raises(WindowError):
        fit_rocof(tr, 1, 0.5, t_d=0.0, fit_window=0.04, degree=2)
    with pytest.raises(ConfigError):
        fit_rocof(tr, 1, 0.5, degree=5)


def test_raw_difference():
    t = np.arange(100) / RATE
    est = raw_rocof(trace_of(60.0 - 0.3 * t), 1, 0.5)
    assert est.value == pytest.approx(-0.3)
    assert est.window == pytest.approx((0.6, 0.62))
