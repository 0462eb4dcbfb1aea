"""Inertia distribution index, center-of-inertia clustering and inertia estimates.

Electrical distance here is the time integral of the squared difference
between two frequency traces over a short window that starts a dead time
after the detected event. The index (IDI) normalizes those distances so the
bus farthest from the reference sits at 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import (
    ConfigError,
    DegenerateEventError,
    DomainError,
    EmptyWindowError,
    NearZeroRocofError,
    NoBoundaryError,
    WindowError,
)
from .swing_sim import FrequencyTrace

ROCOF_FLOOR = 1e-4  # Hz/s
RATIO_THRESHOLD = 0.6
DIST_FLOOR = 1e-18  # Hz^2 s; anything below is rounding, not separation


class CoiProxy(str, enum.Enum):
    GROUND_TRUTH = "GroundTruth"
    UNWEIGHTED_BUS_MEAN = "UnweightedBusMean"


class EstimateMethod(str, enum.Enum):
    SINGLE_EVENT = "SingleEventCoiBus"
    DYNAMIC = "DynamicWeighted"


@dataclass(frozen=True)
class IdiConfig:
    T: float = 0.2
    t_d: float = 0.1
    coi_proxy: CoiProxy = CoiProxy.UNWEIGHTED_BUS_MEAN

    def __post_init__(self):
        object.__setattr__(self, "coi_proxy", CoiProxy(self.coi_proxy))
        if not 0 < self.T <= 0.5:
            raise ConfigError(f"integration period T must be in (0, 0.5] s, got {self.T}")
        if self.t_d < 0:
            raise ConfigError("t_d must be >= 0")


@dataclass
class IdiReport:
    event_T0: float
    dist: dict  # bus -> Hz^2 s
    idi: dict  # bus -> [0, 1]


@dataclass
class CoiCluster:
    k_coi: int
    delta: float
    members: frozenset
    event_T0: float = float("nan")
    dist: dict = field(default_factory=dict)  # bus -> distance to k_coi


@dataclass
class WindowStats:
    window: tuple
    counts: dict  # bus -> int
    k_coi_win: int
    p_bus: int | None
    events_seen: int

    @property
    def C_k(self) -> int:
        return self.counts[self.k_coi_win]

    @property
    def C_p(self) -> int:
        return 0 if self.p_bus is None else self.counts[self.p_bus]


@dataclass(frozen=True)
class InertiaEstimate:
    E_est: float  # MWs
    rocof_used: float  # Hz/s, signed as measured
    dP: float  # MW
    f0: float
    method: EstimateMethod

    def pct_error(self, truth: float) -> float:
        return 100.0 * (self.E_est - truth) / truth

    def to_dict(self, truth: float | None = None) -> dict:
        out = {
            "E_est_mws": self.E_est,
            "rocof_hzps": self.rocof_used,
            "dP_mw": self.dP,
            "f0_hz": self.f0,
            "method": EstimateMethod(self.method).value,
        }
        if truth is not None:
            out["pct_error_vs_truth"] = self.pct_error(truth)
        return out


# -- distances ----------------------------------------------------------------


def _window_grid(times: np.ndarray, a: float, b: float) -> np.ndarray:
    tol = 1e-9 * max(1.0, abs(b))
    if a < times[0] - tol or b > times[-1] + tol:
        raise WindowError(
            f"window [{a:.4f}, {b:.4f}] s not covered by trace [{times[0]:.4f}, {times[-1]:.4f}] s"
        )
    inner = times[(times > a + tol) & (times < b - tol)]
    return np.concatenate([[a], inner, [b]])


def electrical_distance(f_a, f_b, times, T_0: float, cfg: IdiConfig = IdiConfig()) -> float:
    """Integral of (f_a - f_b)^2 over [T_0 + t_d, T_0 + t_d + T], trapezoidal rule."""
    times = np.asarray(times, dtype=float)
    diff = np.asarray(f_a, dtype=float) - np.asarray(f_b, dtype=float)
    a = T_0 + cfg.t_d
    grid = _window_grid(times, a, a + cfg.T)
    d = np.interp(grid, times, diff)
    return float(trapezoid(d * d, grid))


def _distances(traces: FrequencyTrace, ref, T_0: float, cfg: IdiConfig) -> dict:
    t = traces.times
    a = T_0 + cfg.t_d
    grid = _window_grid(t, a, a + cfg.T)
    diff = traces.values - np.asarray(ref, dtype=float)[None, :]
    # interpolate every bus at once on the shared window grid
    i = np.searchsorted(t, grid).clip(1, len(t) - 1)
    w = (grid - t[i - 1]) / (t[i] - t[i - 1])
    d = diff[:, i - 1] * (1 - w) + diff[:, i] * w
    vals = trapezoid(d * d, grid, axis=1)
    return {b: float(v) for b, v in zip(traces.bus_ids, vals)}


def coi_reference(traces: FrequencyTrace, cfg: IdiConfig, coi_ref=None) -> np.ndarray:
    if cfg.coi_proxy is CoiProxy.GROUND_TRUTH:
        if coi_ref is None:
            raise ConfigError("GroundTruth proxy needs the simulated COI trace")
        ref = np.asarray(coi_ref, dtype=float)
        if ref.shape != (traces.n_samples,):
            raise ConfigError("COI reference must align with the trace samples")
        return ref
    return traces.values.mean(axis=0)


def normalize(dist: dict) -> dict:
    top = max(dist.values())
    if not top > DIST_FLOOR:
        raise DegenerateEventError("all electrical distances are zero")
    return {b: v / top for b, v in dist.items()}


def idi_profile(traces: FrequencyTrace, T_0: float, cfg: IdiConfig = IdiConfig(), coi_ref=None) -> IdiReport:
    ref = coi_reference(traces, cfg, coi_ref)
    dist = _distances(traces, ref, T_0, cfg)
    return IdiReport(T_0, dist, normalize(dist))


def coi_bus(report: IdiReport) -> int:
    return min(report.idi, key=lambda b: (report.idi[b], b))


def distances_to_bus(traces: FrequencyTrace, k_ref, T_0: float, cfg: IdiConfig = IdiConfig()) -> dict:
    return _distances(traces, traces.series(k_ref), T_0, cfg)


def relative_delta(dist: dict, fraction: float = 0.1) -> float:
    """Threshold scaled to the event: ``fraction`` of the largest distance."""
    return fraction * max(dist.values())


def coi_cluster(traces: FrequencyTrace, k_coi, T_0: float, delta: float | None = None,
                cfg: IdiConfig = IdiConfig(), delta_fraction: float = 0.1) -> CoiCluster:
    """Buses whose distance to the COI bus is within ``delta``.

    With ``delta=None`` the threshold is ``delta_fraction`` of the largest
    distance seen for this event.
    """
    dist = distances_to_bus(traces, k_coi, T_0, cfg)
    if delta is None:
        delta = relative_delta(dist, delta_fraction)
    members = frozenset(b for b, v in dist.items() if v <= delta) | {k_coi}
    return CoiCluster(k_coi, float(delta), members, T_0, dist)


# -- observation window ------------------------------------------------------


def window_accumulate(clusters, window, bus_ids=None) -> WindowStats:
    """Count COI-area membership per bus over all events in ``window``."""
    clusters = list(clusters)
    if not clusters:
        raise EmptyWindowError(f"no events in window {window}")
    start, end = window
    for c in clusters:
        if not start <= c.event_T0 < end:
            raise ConfigError(f"event at {c.event_T0} s outside window [{start}, {end})")
    if bus_ids is None:
        bus_ids = sorted(set().union(*(c.members for c in clusters)))
    counts = {b: 0 for b in bus_ids}
    for c in clusters:
        for b in c.members:
            counts[b] = counts.get(b, 0) + 1
    ranked = sorted(counts, key=lambda b: (-counts[b], b))
    k = ranked[0]
    p = ranked[1] if len(ranked) > 1 and counts[ranked[1]] > 0 else None
    return WindowStats((start, end), counts, k, p, len(clusters))


def p_bus_qualifies(stats: WindowStats, ratio_threshold: float = RATIO_THRESHOLD,
                    p_distance_ok: bool = True) -> bool:
    if stats.p_bus is None or stats.C_k == 0:
        return False
    return p_distance_ok and stats.C_p / stats.C_k >= ratio_threshold


def weighted_rocof(stats: WindowStats, rocof_k: float, rocof_p: float | None = None,
                   ratio_threshold: float = RATIO_THRESHOLD, p_distance_ok: bool = True) -> float:
    """Count-weighted blend of the two most frequent COI-area buses' RoCoF."""
    C_k = stats.C_k
    if C_k == 0:
        raise DomainError("COI bus has zero count")
    if not p_bus_qualifies(stats, ratio_threshold, p_distance_ok):
        return float(rocof_k)
    if rocof_p is None:
        raise ConfigError(f"bus {stats.p_bus} qualifies but no RoCoF was given for it")
    C_p = stats.C_p
    return float(C_k / (C_p + C_k) * rocof_k + C_p / (C_p + C_k) * rocof_p)


# -- inertia ------------------------------------------------------------------


def estimate_inertia(rocof: float, dP: float, f0: float,
                     method: EstimateMethod = EstimateMethod.SINGLE_EVENT) -> InertiaEstimate:
    """Kinetic energy implied by a known power step and its RoCoF.

    Signs are dropped: inertia is positive whichever way the step went.
    """
    if abs(rocof) < ROCOF_FLOOR:
        raise NearZeroRocofError(f"|RoCoF| {abs(rocof):.3g} Hz/s below floor {ROCOF_FLOOR}")
    if dP == 0:
        raise DomainError("dP must be non-zero")
    E = f0 * abs(dP) / (2.0 * abs(rocof))
    return InertiaEstimate(E, float(rocof), float(dP), float(f0), EstimateMethod(method))


def regional_delta_p(times, flows, T_0: float, t_d: float, orientation=None,
                     avg_window: float = 0.0, pre_window: float = 1.0) -> float:
    """Net change of power flowing into an area across its boundary lines, MW.

    ``flows`` holds one row per boundary branch. ``orientation`` (+1/-1 per
    row) turns each branch's from->to flow into an into-the-area flow.
    """
    flows = np.atleast_2d(np.asarray(flows, dtype=float))
    if flows.size == 0 or flows.shape[0] == 0:
        raise NoBoundaryError("boundary branch set is empty")
    times = np.asarray(times, dtype=float)
    sign = np.ones(flows.shape[0]) if orientation is None else np.asarray(orientation, float)
    into = flows * sign[:, None]
    pre = (times >= T_0 - pre_window) & (times < T_0)
    if not pre.any():
        raise WindowError("no pre-event samples for the baseline")
    at = T_0 + t_d
    if at > times[-1] + 1e-9:
        raise WindowError(f"T_0 + t_d = {at} s beyond the record")
    if avg_window > 0:
        sel = (times >= at - 1e-9) & (times <= at + avg_window + 1e-9)
        post = into[:, sel].mean(axis=1)
    else:
        post = np.array([np.interp(at, times, row) for row in into])
    return float(np.sum(post - into[:, pre].mean(axis=1)))
