"""PMU measurement preprocessing: low-pass filtering, event detection, RoCoF fits."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import ConfigError, WindowError
from .swing_sim import FrequencyTrace


@dataclass(frozen=True)
class FilterSpec:
    corner_hz: float = 0.5
    order: int = 2
    zero_phase: bool = True

    def __post_init__(self):
        if not self.corner_hz > 0:
            raise ConfigError("corner_hz must be > 0")
        if self.order not in range(1, 9):
            raise ConfigError(f"order must be in 1..8, got {self.order}")


@dataclass(frozen=True)
class EventDetectorSpec:
    deadband_hz: float = 0.02
    t_d: float = 0.1
    min_separation: float = 5.0
    baseline_s: float = 1.0

    def __post_init__(self):
        if not self.deadband_hz > 0:
            raise ConfigError("deadband_hz must be > 0")
        if self.t_d < 0:
            raise ConfigError("t_d must be >= 0")


class RocofMethod(str, enum.Enum):
    RAW_DIFFERENCE = "RawDifference"
    POLY_FIT = "PolyFit"


@dataclass(frozen=True)
class RocofEstimate:
    value: float  # Hz/s
    bus: int
    window: tuple
    method: RocofMethod = RocofMethod.POLY_FIT


def filter_coefficients(spec: FilterSpec, rate: float):
    nyq = rate / 2.0
    if not spec.corner_hz < nyq:
        raise ConfigError(f"corner {spec.corner_hz} Hz must be below Nyquist {nyq} Hz")
    return signal.butter(spec.order, spec.corner_hz, btype="lowpass", fs=rate)


def dump_filter_coefficients(spec: FilterSpec, rate: float, path) -> Path:
    b, a = filter_coefficients(spec, rate)
    path = Path(path)
    lines = [
        f"# butterworth lowpass order={spec.order} corner_hz={spec.corner_hz} "
        f"rate={rate} zero_phase={spec.zero_phase}",
        "b = " + " ".join(f"{v:.17g}" for v in b),
        "a = " + " ".join(f"{v:.17g}" for v in a),
    ]
    path.write_text("\n".join(lines) + "\n")
    return path


def butterworth_lowpass(trace: FrequencyTrace, spec: FilterSpec = FilterSpec()) -> FrequencyTrace:
    """Low-pass every bus series.

    Single-pass filtering starts from the steady state of the first sample so a
    flat input passes through untouched. Zero-phase mode runs the filter
    forward and backward with odd-reflection padding of ``3 * order`` samples.
    """
    b, a = filter_coefficients(spec, trace.rate)
    x = trace.values
    if x.shape[1] < 3 * spec.order + 1:
        raise ConfigError(f"trace too short ({x.shape[1]} samples) for order {spec.order}")
    if spec.zero_phase:
        y = signal.filtfilt(b, a, x, axis=1, padtype="odd", padlen=3 * spec.order)
    else:
        zi = signal.lfilter_zi(b, a)
        y, _ = signal.lfilter(b, a, x, axis=1, zi=zi[None, :] * x[:, :1])
    return trace.with_values(y)


def detect_events(trace: FrequencyTrace, spec: EventDetectorSpec = EventDetectorSpec()) -> list[float]:
    """Times at which any bus leaves its trailing-mean band by more than the dead band."""
    x = trace.values
    w = int(round(spec.baseline_s * trace.rate))
    if w < 1 or x.shape[1] <= w:
        return []
    csum = np.cumsum(np.pad(x, ((0, 0), (1, 0))), axis=1)
    # baseline for sample k is the mean of samples k-w .. k-1
    base = (csum[:, w:-1] - csum[:, : -w - 1]) / w
    dev = np.abs(x[:, w:] - base).max(axis=0)
    hits = np.flatnonzero(dev > spec.deadband_hz) + w
    sep = int(round(spec.min_separation * trace.rate))
    out, last = [], None
    for k in hits:
        if last is None or k - last >= sep:
            out.append(k)
            last = k
    return [float(trace.t0 + k / trace.rate) for k in out]


def window_samples(trace: FrequencyTrace, start: float, end: float):
    """Indices of samples inside [start, end], tolerant to float rounding."""
    eps = 1e-6 / trace.rate
    i0 = int(np.ceil((start - trace.t0) * trace.rate - 1e-6))
    i1 = int(np.floor((end - trace.t0) * trace.rate + 1e-6))
    if i0 < 0 or i1 >= trace.n_samples or (end - start) < -eps:
        raise WindowError(
            f"window [{start:.3f}, {end:.3f}] s outside trace "
            f"[{trace.t0:.3f}, {trace.times[-1]:.3f}] s"
        )
    return i0, i1


def fit_rocof(trace: FrequencyTrace, bus, T_0: float, t_d: float = 0.1,
              fit_window: float = 0.5, degree: int = 2) -> RocofEstimate:
    """Least-squares polynomial through the post-event window, slope at its start."""
    if degree not in (1, 2, 3):
        raise ConfigError(f"degree must be 1, 2 or 3, got {degree}")
    if not fit_window > 0:
        raise WindowError("fit_window must be > 0")
    start = T_0 + t_d
    i0, i1 = window_samples(trace, start, start + fit_window)
    if i1 - i0 + 1 < degree + 2:
        raise WindowError(f"{i1 - i0 + 1} samples in window, need {degree + 2}")
    t = trace.times[i0 : i1 + 1] - start
    y = trace.series(bus)[i0 : i1 + 1]
    # scale the abscissa so the normal equations stay well conditioned
    coef = np.polynomial.polynomial.polyfit(t / fit_window, y - y[0], degree)
    return RocofEstimate(float(coef[1] / fit_window), bus, (start, start + fit_window), RocofMethod.POLY_FIT)


def raw_rocof(trace: FrequencyTrace, bus, T_0: float, t_d: float = 0.1,
              span: float | None = None) -> RocofEstimate:
    """Two-point difference quotient; ``span`` defaults to one sample period."""
    span = 1.0 / trace.rate if span is None else span
    start = T_0 + t_d
    i0, i1 = window_samples(trace, start, start + span)
    y = trace.series(bus)
    t = trace.times
    value = (y[i1] - y[i0]) / (t[i1] - t[i0])
    return RocofEstimate(float(value), bus, (start, start + span), RocofMethod.RAW_DIFFERENCE)
