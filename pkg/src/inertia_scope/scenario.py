"""Experiment runner: configuration, the end-to-end estimation pipeline and sweeps.

A run goes: load case, simulate, sample the PMU fleet, low-pass, detect
events, score every event (IDI, COI cluster), fold clusters over observation
windows, fit RoCoF and turn it into kinetic-energy estimates with both the
per-event and the window-weighted method.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    EmptyWindowError,
    InertiaScopeError,
    ParseError,
    PipelineError,
    ValidationError,
    WindowError,
)
from .grid_model import (
    GridCase,
    apply_renewable_penetration,
    bundled_case_path,
    load_case,
    penetration_fraction,
    system_kinetic_energy,
    without_governors,
)
from .inertia_est import (
    CoiCluster,
    EstimateMethod,
    IdiConfig,
    IdiReport,
    InertiaEstimate,
    WindowStats,
    coi_bus,
    coi_cluster,
    distances_to_bus,
    estimate_inertia,
    idi_profile,
    relative_delta,
    weighted_rocof,
    window_accumulate,
)
from .signal_proc import (
    EventDetectorSpec,
    FilterSpec,
    butterworth_lowpass,
    detect_events,
    fit_rocof,
)
from .swing_sim import (
    DisturbanceEvent,
    EventKind,
    FrequencyTrace,
    SimConfig,
    SimResult,
    sample_pmu,
    simulate,
    summarize,
)

log = logging.getLogger(__name__)

THREADS_ENV = "INERTIA_SCOPE_THREADS"
MAX_INTEGRATION_PERIOD = 0.5


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    """Evenly spaced load steps at uniformly drawn buses.

    Signs follow the running net load change so the operating point wanders
    around the base case instead of drifting away from it.
    """

    count: int = 100
    duration: float = 3600.0
    dP_range: tuple = (50.0, 150.0)
    bus_policy: str = "uniform"
    schedule: str = "even"

    def __post_init__(self):
        object.__setattr__(self, "dP_range", tuple(float(v) for v in self.dP_range))
        if self.count < 1:
            raise ValidationError("ensemble.count", f"must be >= 1, got {self.count}")
        if not self.duration > 0:
            raise ValidationError("ensemble.duration", "must be > 0")
        lo, hi = self.dP_range
        if not 0 < lo <= hi:
            raise ValidationError("ensemble.dP_range", f"need 0 < lo <= hi, got {self.dP_range}")
        if self.bus_policy != "uniform":
            raise ValidationError("ensemble.bus_policy", f"unsupported {self.bus_policy!r}")
        if self.schedule != "even":
            raise ValidationError("ensemble.schedule", f"unsupported {self.schedule!r}")

    @property
    def spacing(self) -> float:
        return self.duration / self.count


@dataclass(frozen=True)
class PmuSpec:
    rate: float = 50.0
    noise_sigma: float = 1e-3

    def __post_init__(self):
        if not self.rate > 0:
            raise ValidationError("pmu.rate", "must be > 0")
        if self.noise_sigma < 0:
            raise ValidationError("pmu.noise_sigma", "must be >= 0")


@dataclass(frozen=True)
class SimSpec:
    dt: float = 0.002
    record_every: int = 10
    governors: bool = True
    duration: float | None = None  # explicit-event runs; ensembles use their own span


@dataclass(frozen=True)
class RocofSpec:
    fit_window: float = 3.0
    degree: int = 2
    trace: str = "filtered"  # or "raw"

    def __post_init__(self):
        if self.trace not in ("filtered", "raw"):
            raise ValidationError("rocof.trace", f"must be 'filtered' or 'raw', got {self.trace!r}")


@dataclass(frozen=True)
class ClusterSpec:
    delta_fraction: float = 0.05
    delta: float | None = None  # absolute threshold, Hz^2 s; overrides the fraction
    ratio_threshold: float = 0.6
    p_delta_fraction: float | None = None  # distance test for the runner-up bus

    def __post_init__(self):
        if self.delta_fraction < 0 or (self.delta is not None and self.delta < 0):
            raise ValidationError("cluster.delta", "thresholds must be >= 0")


@dataclass(frozen=True)
class OutputSpec:
    trace_stride: int = 1
    plots: bool = True

    def __post_init__(self):
        if self.trace_stride < 1:
            raise ValidationError("outputs.trace_stride", "must be >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    case_path: str = "ieee24"
    events: tuple | None = None
    ensemble: EnsembleSpec | None = None
    window: float = 600.0
    window_stride: float | None = None
    seed: int = 0
    idi: IdiConfig = IdiConfig()
    cluster: ClusterSpec = ClusterSpec()
    filter: FilterSpec = FilterSpec()
    detector: EventDetectorSpec = EventDetectorSpec()
    detect_on: str = "raw"
    idi_on: str = "filtered"
    rocof: RocofSpec = RocofSpec()
    pmu: PmuSpec = PmuSpec()
    sim: SimSpec = SimSpec()
    outputs: OutputSpec = OutputSpec()

    def __post_init__(self):
        if self.events is not None:
            object.__setattr__(self, "events", tuple(self.events))
        if self.events is not None and self.ensemble is not None:
            raise ValidationError("events", "give an explicit event list or an ensemble, not both")
        if not self.window > 0:
            raise ValidationError("window", "must be > 0")
        if self.window_stride is not None and not 0 < self.window_stride <= self.window:
            raise ValidationError("window_stride", "must be in (0, window]")
        if self.detect_on not in ("raw", "filtered"):
            raise ValidationError("detect_on", "must be 'raw' or 'filtered'")
        if self.idi_on not in ("raw", "filtered"):
            raise ValidationError("idi_on", "must be 'raw' or 'filtered'")
        if self.case_path != "ieee24" and not Path(self.case_path).exists():
            raise ValidationError("case_path", f"no such file: {self.case_path}")

    @property
    def noise_seed(self) -> int:
        return int(np.random.SeedSequence(self.seed).generate_state(1)[0])

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


_SECTIONS = {
    "ensemble": EnsembleSpec,
    "idi": IdiConfig,
    "cluster": ClusterSpec,
    "filter": FilterSpec,
    "detector": EventDetectorSpec,
    "rocof": RocofSpec,
    "pmu": PmuSpec,
    "sim": SimSpec,
    "outputs": OutputSpec,
}


def _section(name, cls, doc):
    if not isinstance(doc, dict):
        raise ValidationError(name, "must be an object")
    known = {f.name for f in dataclasses.fields(cls)}
    extra = set(doc) - known
    if extra:
        raise ValidationError(name, f"unknown keys {sorted(extra)}")
    try:
        return cls(**doc)
    except InertiaScopeError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(name, str(exc)) from None


def _event_from_dict(i, doc) -> DisturbanceEvent:
    try:
        return DisturbanceEvent(
            t=float(doc["t_s"]), bus=int(doc["bus"]), dP=float(doc["dP_mw"]),
            kind=doc.get("kind", EventKind.LOAD_STEP.value),
        )
    except KeyError as exc:
        raise ValidationError(f"events[{i}]", f"missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"events[{i}]", str(exc)) from None


def config_from_dict(doc: dict, base_dir=None) -> ScenarioConfig:
    """Build a config from its JSON form. Relative case paths resolve against ``base_dir``."""
    if not isinstance(doc, dict):
        raise ValidationError("config", "top level must be an object")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    extra = set(doc) - known
    if extra:
        raise ValidationError("config", f"unknown keys {sorted(extra)}")
    kw = {}
    for name, cls in _SECTIONS.items():
        if doc.get(name) is not None:
            kw[name] = _section(name, cls, doc[name])
    if doc.get("events") is not None:
        if not isinstance(doc["events"], list):
            raise ValidationError("events", "must be a list")
        kw["events"] = tuple(_event_from_dict(i, e) for i, e in enumerate(doc["events"]))
    for name in ("window", "window_stride"):
        if doc.get(name) is not None:
            kw[name] = float(doc[name])
    if "seed" in doc:
        kw["seed"] = int(doc["seed"])
    for name in ("detect_on", "idi_on"):
        if name in doc:
            kw[name] = doc[name]
    if "case_path" in doc:
        p = str(doc["case_path"])
        if p != "ieee24" and base_dir is not None and not Path(p).is_absolute():
            p = str(Path(base_dir) / p)
        kw["case_path"] = p
    return ScenarioConfig(**kw)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError("config", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return config_from_dict(doc, base_dir=path.parent)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    def plain(obj):
        if dataclasses.is_dataclass(obj):
            return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if isinstance(obj, (list, tuple)):
            return [plain(v) for v in obj]
        if hasattr(obj, "value"):  # enums
            return obj.value
        return obj

    out = plain(cfg)
    if cfg.events is not None:
        out["events"] = [
            {"t_s": e.t, "bus": e.bus, "dP_mw": e.dP, "kind": e.kind.value} for e in cfg.events
        ]
    return out


# -- helpers ------------------------------------------------------------------


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    cpu = os.cpu_count() or 1
    if raw is None or raw == "":
        return cpu
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {n}")
    return min(n, cpu)


def _pmap(fn, items):
    """Ordered map, threaded up to the configured worker cap."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def generate_ensemble(spec: EnsembleSpec, case: GridCase, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    buses = list(case.buses)
    out, net = [], 0.0
    for i in range(spec.count):
        mag = float(rng.uniform(*spec.dP_range))
        bus = buses[int(rng.integers(len(buses)))]
        # dP < 0 adds load; shed load whenever the net change is positive
        dP = -mag if net <= 0 else mag
        net -= dP
        t = round(spec.spacing * (i + 0.5), 6)
        out.append(DisturbanceEvent(t, bus, round(dP, 6), EventKind.LOAD_STEP))
    return tuple(out)


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except PipelineError:
        raise
    except InertiaScopeError as exc:
        raise PipelineError(name, exc) from exc


def _windows(duration: float, width: float, stride: float | None):
    stride = width if stride is None else stride
    out, start = [], 0.0
    while start < duration - 1e-9:
        out.append((round(start, 9), round(start + width, 9)))
        start += stride
    return out


def coi_reference_trace(result: SimResult, trace: FrequencyTrace, spec: FilterSpec | None = None) -> np.ndarray:
    """Simulated COI frequency on the PMU sample grid, optionally through the same low-pass."""
    ref = np.interp(trace.times, result.t, result.coi_freq)
    if spec is None:
        return ref
    one = FrequencyTrace(trace.t0, trace.rate, ref[None, :], (0,))
    return butterworth_lowpass(one, spec).values[0]


def _idi_inputs(cfg: ScenarioConfig, result, raw, filtered):
    """Trace the IDI runs on and the matching COI reference."""
    if cfg.idi_on == "raw":
        return raw, coi_reference_trace(result, raw)
    return filtered, coi_reference_trace(result, raw, cfg.filter)


# -- report -------------------------------------------------------------------


@dataclass
class EventRecord:
    index: int
    T0: float
    source: DisturbanceEvent | None  # injected event this detection belongs to
    idi: IdiReport
    cluster: CoiCluster
    truth: float
    window: tuple | None = None
    single: InertiaEstimate | None = None
    dynamic: InertiaEstimate | None = None
    p_distance_ok: bool = False

    @property
    def phantom(self) -> bool:
        return self.source is None


@dataclass
class EnsembleReport:
    config: ScenarioConfig
    case_name: str
    truth: float
    injected: tuple
    events: list
    windows: list  # WindowStats, chronological
    summary: dict
    trace: FrequencyTrace | None = None
    filtered: FrequencyTrace | None = None
    result: SimResult | None = None
    skipped: list = field(default_factory=list)  # (T0, reason)

    @property
    def estimated(self) -> list:
        return [e for e in self.events if e.single is not None]

    def _mae(self, attr) -> float:
        errs = [abs(getattr(e, attr).pct_error(e.truth)) for e in self.estimated]
        return float(np.mean(errs)) if errs else float("nan")

    @property
    def mae_single(self) -> float:
        return self._mae("single")

    @property
    def mae_dynamic(self) -> float:
        return self._mae("dynamic")

    def events_per_window(self) -> list:
        return [w.events_seen for w in self.windows]


# -- pipeline -----------------------------------------------------------------


def _pair(T0: float, injected, tol: float, horizon: float):
    """Latest injected event at or before ``T0`` (within one sample) and not older than ``horizon``."""
    best = None
    for ev in injected:
        if ev.t <= T0 + tol and T0 - ev.t <= horizon:
            best = ev
    return best


def _delta_for(dist: dict, spec: ClusterSpec, fraction=None) -> float:
    if spec.delta is not None:
        return spec.delta
    return relative_delta(dist, spec.delta_fraction if fraction is None else fraction)


def simulate_scenario(cfg: ScenarioConfig, case: GridCase | None = None):
    """Load, simulate and sample. Returns (case, injected events, result, raw trace)."""
    if case is None:
        case = _stage("load", load_case, cfg.case_path)
    if not cfg.sim.governors:
        case = without_governors(case)
    if cfg.ensemble is not None:
        injected = _stage("ensemble", generate_ensemble, cfg.ensemble, case, cfg.seed)
        duration = cfg.ensemble.duration
    else:
        injected = cfg.events or ()
        duration = cfg.sim.duration
        if duration is None:
            duration = (max(e.t for e in injected) + 20.0) if injected else 10.0
    n = round(duration / cfg.sim.dt)
    sim_cfg = _stage(
        "simulate", SimConfig, dt=cfg.sim.dt, duration=n * cfg.sim.dt,
        record_every=cfg.sim.record_every, store_flows=False,
    )
    result = _stage("simulate", simulate, case, injected, sim_cfg)
    raw = _stage("pmu", sample_pmu, result, cfg.pmu.rate, cfg.pmu.noise_sigma, cfg.noise_seed)
    return case, injected, result, raw


def run_pipeline(cfg: ScenarioConfig, outdir=None, case: GridCase | None = None) -> EnsembleReport:
    case, injected, result, raw = simulate_scenario(cfg, case)
    filtered = _stage("filter", butterworth_lowpass, raw, cfg.filter)
    det_trace = raw if cfg.detect_on == "raw" else filtered
    detections = _stage("detect", detect_events, det_trace, cfg.detector)
    idi_trace, coi_ref = _idi_inputs(cfg, result, raw, filtered)
    fit_trace = filtered if cfg.rocof.trace == "filtered" else raw
    tol = 1.0 / raw.rate + 1e-9
    horizon = cfg.detector.min_separation
    t_end = raw.times[-1]
    need = max(cfg.idi.t_d + cfg.idi.T, cfg.detector.t_d + cfg.rocof.fit_window)

    usable, skipped = [], []
    for T0 in detections:
        if T0 + need > t_end + 1e-9:
            skipped.append((T0, "analysis window runs past the record"))
            log.warning("event at %.3f s skipped: analysis window runs past the record", T0)
        else:
            usable.append(T0)

    def score(T0):
        rep = idi_profile(idi_trace, T0, cfg.idi, coi_ref=coi_ref)
        k = coi_bus(rep)
        dist = distances_to_bus(idi_trace, k, T0, cfg.idi)
        cl = coi_cluster(idi_trace, k, T0, _delta_for(dist, cfg.cluster), cfg.idi)
        return rep, cl

    scored = _stage("idi", _pmap, score, usable)
    records = []
    for i, (T0, (rep, cl)) in enumerate(zip(usable, scored)):
        src = _pair(T0, injected, tol, horizon)
        if src is None:
            log.warning("detection at %.3f s matches no injected event", T0)
        records.append(EventRecord(i, T0, src, rep, cl, result.kinetic_energy_at(T0)))

    real = [r for r in records if not r.phantom]
    windows = []
    span = result.t[-1]
    for win in _windows(span, cfg.window, cfg.window_stride):
        inside = [r for r in real if win[0] <= r.T0 < win[1]]
        if not inside:
            continue
        stats = _stage("window", window_accumulate, [r.cluster for r in inside], win, raw.bus_ids)
        windows.append(stats)
        for r in inside:
            if r.window is None:
                r.window = win

    by_window = {w.window: w for w in windows}

    def rocof(bus, T0):
        return fit_rocof(fit_trace, bus, T0, cfg.detector.t_d, cfg.rocof.fit_window, cfg.rocof.degree).value

    def estimate(r: EventRecord):
        dP = r.source.dP
        st = by_window[r.window]
        single = estimate_inertia(rocof(r.cluster.k_coi, r.T0), dP, case.f0, EstimateMethod.SINGLE_EVENT)
        r_k = rocof(st.k_coi_win, r.T0)
        r_p, ok = None, False
        if st.p_bus is not None:
            d = distances_to_bus(idi_trace, st.k_coi_win, r.T0, cfg.idi)
            ok = d[st.p_bus] <= _delta_for(d, cfg.cluster, cfg.cluster.p_delta_fraction)
            if ok:
                r_p = rocof(st.p_bus, r.T0)
        blended = weighted_rocof(st, r_k, r_p, cfg.cluster.ratio_threshold, p_distance_ok=ok)
        dynamic = estimate_inertia(blended, dP, case.f0, EstimateMethod.DYNAMIC)
        return single, dynamic, ok

    outs = _stage("estimate", _pmap, estimate, real)
    for r, (s, d, ok) in zip(real, outs):
        r.single, r.dynamic, r.p_distance_ok = s, d, ok

    summary = summarize(result)
    report = EnsembleReport(
        config=cfg,
        case_name=case.name,
        truth=system_kinetic_energy(case),
        injected=tuple(injected),
        events=records,
        windows=windows,
        summary=summary,
        trace=raw,
        filtered=filtered,
        result=result,
        skipped=skipped,
    )
    log.info(
        "%d injected, %d detected, %d estimated; MAE single %.3f %%, dynamic %.3f %%",
        len(injected), len(detections), len(report.estimated), report.mae_single, report.mae_dynamic,
    )
    if outdir is not None:
        from .report import emit_artifacts

        emit_artifacts(report, outdir)
    return report


# -- sweeps -------------------------------------------------------------------


@dataclass
class IntegrationSweep:
    T_values: list
    mean_idi: dict  # T -> {bus: mean IDI over events}
    coi_bus: dict  # T -> bus with the lowest mean IDI
    optimal_T: float
    n_events: int

    def rows(self):
        for T in self.T_values:
            for b, v in self.mean_idi[T].items():
                yield T, b, v


def sweep_integration_period(cfg: ScenarioConfig, T_values, outdir=None) -> IntegrationSweep:
    """Re-score the same detected events for each integration period."""
    T_values = [float(t) for t in T_values]
    if not T_values:
        raise ConfigError("no integration periods given")
    bad = [t for t in T_values if not 0 < t <= MAX_INTEGRATION_PERIOD]
    if bad:
        raise ConfigError(f"integration periods must be in (0, {MAX_INTEGRATION_PERIOD}] s, got {bad}")
    uniq = sorted(set(T_values))
    if len(uniq) != len(T_values):
        log.warning("duplicate integration periods dropped: %s", T_values)

    case, injected, result, raw = simulate_scenario(cfg)
    filtered = _stage("filter", butterworth_lowpass, raw, cfg.filter)
    det_trace = raw if cfg.detect_on == "raw" else filtered
    detections = _stage("detect", detect_events, det_trace, cfg.detector)
    idi_trace, coi_ref = _idi_inputs(cfg, result, raw, filtered)
    t_end = raw.times[-1]
    detections = [T0 for T0 in detections if T0 + cfg.idi.t_d + max(uniq) <= t_end]
    if not detections:
        raise PipelineError("detect", EmptyWindowError("no usable events for the sweep"))

    def one(T):
        icfg = dataclasses.replace(cfg.idi, T=T)
        reps = [idi_profile(idi_trace, T0, icfg, coi_ref=coi_ref) for T0 in detections]
        return {b: float(np.mean([r.idi[b] for r in reps])) for b in raw.bus_ids}

    mean_idi = dict(zip(uniq, _stage("idi", _pmap, one, uniq)))
    best_bus = {T: min(m, key=lambda b: (m[b], b)) for T, m in mean_idi.items()}
    optimal = min(uniq, key=lambda T: (mean_idi[T][best_bus[T]], T))
    sweep = IntegrationSweep(uniq, mean_idi, best_bus, optimal, len(detections))
    log.info("optimal integration period %.3f s (COI bus %d)", optimal, best_bus[optimal])
    if outdir is not None:
        from .report import emit_integration_sweep

        emit_integration_sweep(sweep, outdir)
    return sweep


@dataclass
class PenetrationRow:
    buses: tuple
    penetration: float  # fraction of scheduled output
    energy_pre: float  # MWs before the disturbance
    energy_post: float  # MWs still synchronized after it
    initial_rocof: float
    nadir: float
    t_nadir: float


@dataclass
class PenetrationSweep:
    event: DisturbanceEvent
    rows: list
    traces: list  # (t, coi_freq) per case


DEFAULT_PENETRATION_EVENT = DisturbanceEvent(1.0, 23, -200.0, EventKind.GEN_TRIP)


def sweep_penetration(cfg: ScenarioConfig, bus_sets, event: DisturbanceEvent | None = None,
                      duration: float = 30.0, outdir=None) -> PenetrationSweep:
    """Simulate one disturbance per renewable-replacement case."""
    event = DEFAULT_PENETRATION_EVENT if event is None else event
    base = _stage("load", load_case, cfg.case_path)
    if not cfg.sim.governors:
        base = without_governors(base)
    bus_sets = [tuple(s) for s in bus_sets]
    n = round(duration / cfg.sim.dt)
    sim_cfg = SimConfig(dt=cfg.sim.dt, duration=n * cfg.sim.dt, record_every=1, store_flows=False)

    def one(buses):
        case = apply_renewable_penetration(base, buses) if buses else base
        res = simulate(case, [event], sim_cfg)
        s = summarize(res)
        return PenetrationRow(
            buses=buses,
            penetration=penetration_fraction(case),
            energy_pre=system_kinetic_energy(case),
            energy_post=res.kinetic_energy_final,
            initial_rocof=s["initial_coi_rocof_hzps"],
            nadir=s["nadir_hz"],
            t_nadir=s["t_nadir_s"],
        ), (res.t, res.coi_freq)

    out = _stage("penetration", _pmap, one, bus_sets)
    sweep = PenetrationSweep(event, [o[0] for o in out], [o[1] for o in out])
    if outdir is not None:
        from .report import emit_penetration_sweep

        emit_penetration_sweep(sweep, outdir)
    return sweep


@dataclass
class CoiShift:
    bus_sets: list
    reports: list  # EnsembleReport per case
    counts: list  # {bus: summed C_k over all windows} per case

    def mass_outside(self, i: int, buses) -> int:
        return sum(v for b, v in self.counts[i].items() if b not in set(buses))


def total_counts(report: EnsembleReport) -> dict:
    out = {b: 0 for b in report.trace.bus_ids}
    for w in report.windows:
        for b, v in w.counts.items():
            out[b] += v
    return out


def coi_shift_experiment(cfg: ScenarioConfig, bus_sets, outdir=None) -> CoiShift:
    """Run the full pipeline once per replacement case with the same seed."""
    bus_sets = [tuple(s) for s in bus_sets]
    if len(bus_sets) < 2:
        raise ConfigError("need at least two cases to compare")
    base = _stage("load", load_case, cfg.case_path)

    def one(buses):
        case = apply_renewable_penetration(base, buses) if buses else base
        return run_pipeline(cfg, case=case)

    reports = [one(b) for b in bus_sets]
    shift = CoiShift(bus_sets, reports, [total_counts(r) for r in reports])
    if outdir is not None:
        from .report import emit_coi_shift

        emit_coi_shift(shift, outdir)
    return shift


def acceptance_ensemble_config(seed: int = 7) -> ScenarioConfig:
    """Noisy 60-minute ensemble used for the method comparison."""
    return ScenarioConfig(
        case_path="ieee24",
        ensemble=EnsembleSpec(count=100, duration=3600.0, dP_range=(50.0, 150.0)),
        window=600.0,
        seed=seed,
        idi=IdiConfig(T=0.2, t_d=0.1, coi_proxy="GroundTruth"),
        cluster=ClusterSpec(delta_fraction=0.05),
        detector=EventDetectorSpec(deadband_hz=0.02, t_d=0.1, min_separation=15.0),
        rocof=RocofSpec(fit_window=3.0, degree=2, trace="filtered"),
        pmu=PmuSpec(rate=50.0, noise_sigma=1e-3),
        outputs=OutputSpec(trace_stride=10),
    )


__all__ = [
    "ClusterSpec", "CoiShift", "EnsembleReport", "EnsembleSpec", "EventRecord",
    "IntegrationSweep", "OutputSpec", "PenetrationRow", "PenetrationSweep", "PmuSpec",
    "RocofSpec", "ScenarioConfig", "SimSpec", "WindowStats", "acceptance_ensemble_config",
    "bundled_case_path", "coi_shift_experiment", "config_from_dict", "config_to_dict",
    "generate_ensemble", "load_config", "run_pipeline", "simulate_scenario",
    "sweep_integration_period", "sweep_penetration", "total_counts", "worker_count",
]
