"""Linearized multi-machine swing-equation simulator.

Each synchronous unit is a classical machine (rotor angle behind its
transient reactance) attached to its terminal bus. The network is lossless
DC-style: bus angles are solved algebraically at every instant, and a bus
frequency is the weighted blend of machine speeds that the network imposes
on that bus (the frequency-divider map ``F = Y^-1 C``). Loads draw
``P + D_f * df_bus``. Governors are first-order droop.

Between two events the model is linear time-invariant, so the fixed-step RK4
update collapses to a constant matrix; it is built once per segment by
running one RK4 step on the identity and then reused.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, NumericsError, ValidationError
from .grid_model import GridCase, susceptance_matrix, system_kinetic_energy

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
MAX_DEVIATION_HZ = 5.0
_MATCH_TOL_MW = 1e-6


class EventKind(str, enum.Enum):
    GEN_TRIP = "GenTrip"
    LOAD_STEP = "LoadStep"


@dataclass(frozen=True)
class DisturbanceEvent:
    """Active-power step. ``dP < 0`` means lost generation or added load."""

    t: float
    bus: int
    dP: float
    kind: EventKind = EventKind.LOAD_STEP

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        if self.t < 0:
            raise ValidationError("event.t", f"must be >= 0, got {self.t}")
        if self.dP == 0:
            raise ValidationError("event.dP", "must be non-zero")
        if self.kind is EventKind.GEN_TRIP and self.dP > 0:
            raise ValidationError("event.dP", "a generator trip removes power (dP < 0)")

    @property
    def deficit(self) -> float:
        """Power shortfall the event creates, MW (positive for a loss)."""
        return -self.dP


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.002
    duration: float = 10.0
    method: str = "rk4"
    record_every: int = 1
    coi_weighting: str = "HS"  # "HS" (energy) or "H" (inertia constant only)
    store_flows: bool = True

    def __post_init__(self):
        if not 0 < self.dt <= 0.01:
            raise ConfigError(f"dt must be in (0, 0.01], got {self.dt}")
        if not self.duration > 0:
            raise ConfigError("duration must be > 0")
        n = self.duration / self.dt
        if abs(n - round(n)) > 1e-6:
            raise ConfigError(f"duration/dt must be an integer, got {n}")
        if self.method != "rk4":
            raise ConfigError(f"unsupported method {self.method!r}")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if self.coi_weighting not in ("HS", "H"):
            raise ConfigError("coi_weighting must be 'HS' or 'H'")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass
class SimResult:
    t: np.ndarray
    f0: float
    bus_ids: tuple
    bus_freq: np.ndarray  # (n_bus, n_t) Hz
    machine_freq: np.ndarray  # (n_gen, n_t) Hz, NaN while disconnected or non-synchronous
    coi_freq: np.ndarray  # (n_t,) Hz
    branch_flow: np.ndarray | None  # (n_branch, n_t) MW, from -> to
    bus_injection: np.ndarray | None  # (n_bus, n_t) MW into the network
    events: tuple
    dt: float
    energy_segments: list = field(default_factory=list)  # [(t_start, MWs)]

    @property
    def kinetic_energy_final(self) -> float:
        return self.energy_segments[-1][1]

    def kinetic_energy_at(self, t: float) -> float:
        e = self.energy_segments[0][1]
        for ts, val in self.energy_segments:
            if ts <= t:
                e = val
        return e


@dataclass
class FrequencyTrace:
    """Uniformly sampled per-bus frequency record (what a PMU fleet reports)."""

    t0: float
    rate: float
    values: np.ndarray  # (n_bus, n_samples) Hz
    bus_ids: tuple
    noise_sigma: float = 0.0

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        self.bus_ids = tuple(self.bus_ids)
        if not self.rate > 0:
            raise ConfigError("rate must be > 0")
        if self.values.shape[0] != len(self.bus_ids):
            raise ConfigError("one value row per bus required")

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) / self.rate

    def row(self, bus) -> int:
        try:
            return self.bus_ids.index(bus)
        except ValueError:
            raise ValidationError("bus", f"bus {bus} not monitored") from None

    def series(self, bus) -> np.ndarray:
        return self.values[self.row(bus)]

    def with_values(self, values) -> "FrequencyTrace":
        return FrequencyTrace(self.t0, self.rate, values, self.bus_ids, self.noise_sigma)

    def to_csv(self, path, precision: int = 9) -> Path:
        path = Path(path)
        header = "time_s," + ",".join(f"bus_{b}_hz" for b in self.bus_ids)
        data = np.column_stack([self.times, self.values.T])
        fmt = ["%.6f"] + [f"%.{precision}f"] * len(self.bus_ids)
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt=fmt)
        return path

    @classmethod
    def from_csv(cls, path) -> "FrequencyTrace":
        path = Path(path)
        with path.open() as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        buses = tuple(int(h.split("_")[1]) for h in header[1:])
        t = data[:, 0]
        rate = 1.0 / (t[1] - t[0]) if len(t) > 1 else 1.0
        return cls(t0=t[0], rate=round(rate, 9), values=data[:, 1:].T, bus_ids=buses)


# -- integrator ---------------------------------------------------------------


def rk4_step(f, y, h):
    """One classical Runge-Kutta step for the autonomous system y' = f(y)."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# -- model assembly -----------------------------------------------------------


@dataclass
class _State:
    """Mutable operating point that events edit."""

    active: np.ndarray  # bool per generator (connected)
    p_set: np.ndarray  # MW per generator
    p_load: np.ndarray  # MW per bus


class _Segment:
    """Linear model for one fixed machine set and set of power inputs."""

    def __init__(self, case: GridCase, st: _State, dt: float, coi_weighting: str):
        gens = case.generators
        G, n = len(gens), case.n_bus
        f0 = case.f0
        sync = np.array([g.synchronous for g in gens]) & st.active
        self.sync = sync
        bus_of = np.array([case.bus_index(g.bus) for g in gens])
        self.bus_of = bus_of

        K = np.array([g.S_B / g.xd if s else 0.0 for g, s in zip(gens, sync)])
        C = np.zeros((n, G))
        C[bus_of[sync], np.flatnonzero(sync)] = K[sync]
        Y = case.base_mva * susceptance_matrix(case) + np.diag(C.sum(axis=1))
        Yinv = np.linalg.inv(Y)

        p_inj = -st.p_load.copy()
        for j, g in enumerate(gens):
            if st.active[j] and not g.synchronous:
                p_inj[bus_of[j]] += st.p_set[j]
        self.p_inj = p_inj
        self.d_load = case.load_damping_vector()

        F = Yinv @ C  # bus-frequency map
        E = np.zeros((G, n))
        E[np.arange(G), bus_of] = 1.0
        T_f = -Yinv @ (self.d_load[:, None] * F)
        T_0 = Yinv @ p_inj
        self.F, self.T_d, self.T_f, self.T_0, self.K = F, F, T_f, T_0, K
        self.E = E

        w = np.array([g.H * (g.S_B if coi_weighting == "HS" else 1.0) for g in gens]) * sync
        self.coi_w = w / w.sum() if w.sum() > 0 else w
        self.energy = float(sum(g.H * g.S_B for g, on in zip(gens, sync) if on))
        # damper torque on rotor speed relative to the energy-weighted COI; sums to
        # zero over the fleet when damper_pu is proportional to H
        hs = np.array([g.H * g.S_B for g in gens]) * sync
        Dw = np.array([g.damper * g.S_B / f0 if s else 0.0 for g, s in zip(gens, sync)])
        rel = np.eye(G) - np.outer(np.ones(G), hs / hs.sum()) if hs.sum() > 0 else np.eye(G)
        P_dw = Dw[:, None] * rel

        M = np.array([2.0 * g.H * g.S_B / f0 if s else 1.0 for g, s in zip(gens, sync)])
        Dm = np.array([g.D * g.S_B / f0 if s else 0.0 for g, s in zip(gens, sync)])
        gov = np.array([s and g.governor is not None for g, s in zip(gens, sync)])
        Tg = np.array([g.governor.T_g if gv else 1.0 for g, gv in zip(gens, gov)])
        gain = np.array([g.S_B / (g.governor.R * f0) if gv else 0.0 for g, gv in zip(gens, gov)])

        s = sync.astype(float)
        Kd = np.diag(K)
        # P_e = Kd (delta - E theta),  theta = T_d delta + T_f df + T_0
        Pe_d = Kd @ (np.eye(G) - E @ F)
        Pe_f = -Kd @ E @ T_f
        Pe_0 = -Kd @ E @ T_0

        N = 3 * G + 1
        A = np.zeros((N, N))
        iD, iF, iP = slice(0, G), slice(G, 2 * G), slice(2 * G, 3 * G)
        A[iD, iF] = TWO_PI * np.diag(s)
        Minv = s / M
        A[iF, iD] = -Minv[:, None] * Pe_d
        A[iF, iF] = -Minv[:, None] * (Pe_f + P_dw) - np.diag(Minv * Dm)
        A[iF, iP] = np.diag(Minv)
        A[iF, -1] = Minv * (st.p_set * s - Pe_0)
        g_ = gov.astype(float)
        A[iP, iF] = -np.diag(g_ * gain / Tg)
        A[iP, iP] = -np.diag(g_ / Tg)
        self.A = A
        self.G = G

        Phi = rk4_step(lambda X: A @ X, np.eye(N), dt)
        self._powers = {1: Phi}

    def propagator(self, k: int) -> np.ndarray:
        P = self._powers.get(k)
        if P is None:
            P = np.linalg.matrix_power(self._powers[1], k)
            self._powers[k] = P
        return P

    def outputs(self, X: np.ndarray, case: GridCase, f0: float, store_flows: bool):
        """Map recorded states (N, m) to observable traces."""
        G = self.G
        delta, dfm = X[:G], X[G : 2 * G]
        bus_df = self.F @ dfm
        mach = np.where(self.sync[:, None], f0 + dfm, np.nan)
        coi = f0 + self.coi_w @ dfm
        flows = inj = None
        if store_flows:
            theta = self.T_d @ delta + self.T_f @ dfm + self.T_0[:, None]
            frm = np.array([case.bus_index(b.from_bus) for b in case.branches])
            to = np.array([case.bus_index(b.to_bus) for b in case.branches])
            bvec = np.array([b.b for b in case.branches]) * case.base_mva
            flows = bvec[:, None] * (theta[frm] - theta[to])
            pe = self.K[:, None] * (delta - theta[self.bus_of])
            inj = self.E.T @ pe + self.p_inj[:, None] - self.d_load[:, None] * bus_df
        return f0 + bus_df, mach, coi, flows, inj


def _equilibrium_angles(seg: _Segment, st: _State, case: GridCase) -> np.ndarray:
    """Rotor angles of the pre-event steady state (all speeds nominal)."""
    sync = np.flatnonzero(seg.sync)
    n, m = case.n_bus, len(sync)
    K = seg.K[sync]
    L = np.zeros((m + n, m + n))
    L[:m, :m] = np.diag(K)
    Cs = np.zeros((n, m))
    Cs[seg.bus_of[sync], np.arange(m)] = K
    L[:m, m:] = -Cs.T
    L[m:, :m] = -Cs
    L[m:, m:] = case.base_mva * susceptance_matrix(case) + np.diag(Cs.sum(axis=1))
    p = np.concatenate([st.p_set[sync], seg.p_inj])
    ang = np.zeros(m + n)
    ang[1:] = np.linalg.solve(L[1:, 1:], p[1:])
    delta = np.zeros(seg.G)
    delta[sync] = ang[:m]
    return delta


def _apply_event(case: GridCase, st: _State, ev: DisturbanceEvent) -> None:
    b = case.bus_index(ev.bus)
    if ev.kind is EventKind.LOAD_STEP:
        st.p_load[b] -= ev.dP
        return
    need = -ev.dP
    cands = [
        j for j, g in enumerate(case.generators)
        if g.bus == ev.bus and st.active[j] and st.p_set[j] >= need - _MATCH_TOL_MW
    ]
    if not cands:
        raise ValidationError(
            "event.dP", f"no online unit at bus {ev.bus} can lose {need:.3f} MW"
        )
    j = min(cands, key=lambda k: (st.p_set[k], k))
    if abs(st.p_set[j] - need) <= _MATCH_TOL_MW:
        st.active[j] = False
        st.p_set[j] = 0.0
    else:
        st.p_set[j] -= need


def simulate(case: GridCase, events, cfg: SimConfig = SimConfig()) -> SimResult:
    """Integrate the grid through a sequence of power-step events."""
    events = tuple(events)
    times = [ev.t for ev in events]
    if times != sorted(times):
        raise ConfigError("events must be sorted by time")
    for ev in events:
        if not 0 <= ev.t < cfg.duration:
            raise ConfigError(f"event at t={ev.t} outside [0, {cfg.duration})")
        case.bus_index(ev.bus)
    if not case.synchronous_units:
        raise DomainError("no synchronous unit in case")

    n_steps = cfg.n_steps
    ev_steps = [int(round(ev.t / cfg.dt)) for ev in events]
    for ev, k in zip(events, ev_steps):
        if abs(k * cfg.dt - ev.t) > 1e-9:
            log.warning("event at t=%.6f snapped to %.6f", ev.t, k * cfg.dt)
    rec_steps = np.arange(0, n_steps + 1, cfg.record_every)

    st = _State(
        active=np.ones(len(case.generators), dtype=bool),
        p_set=np.array([g.P_set for g in case.generators], dtype=float),
        p_load=case.load_vector(),
    )
    seg = _Segment(case, st, cfg.dt, cfg.coi_weighting)
    G = seg.G
    x = np.zeros(3 * G + 1)
    x[:G] = _equilibrium_angles(seg, st, case)
    x[-1] = 1.0

    # boundaries where something happens: events and segment ends
    pending = list(zip(ev_steps, events))
    segments = []  # (seg, [record indices], states)
    energy_segments = [(0.0, seg.energy)]
    k = 0
    rec_i = 0
    cur_rec, cur_states = [], []

    def flush():
        if cur_rec:
            segments.append((seg, list(cur_rec), np.array(cur_states).T))
            cur_rec.clear()
            cur_states.clear()

    while True:
        while pending and pending[0][0] == k:
            flush()
            _, ev = pending.pop(0)
            _apply_event(case, st, ev)
            seg = _Segment(case, st, cfg.dt, cfg.coi_weighting)
            energy_segments.append((ev.t, seg.energy))
            if not seg.sync.any():
                raise DomainError(f"event at t={ev.t} disconnected the last synchronous unit")
        if rec_i < len(rec_steps) and rec_steps[rec_i] == k:
            if not np.all(np.isfinite(x)) or np.max(np.abs(x[G : 2 * G])) > MAX_DEVIATION_HZ:
                raise NumericsError(f"frequency deviation exceeded {MAX_DEVIATION_HZ} Hz at t={k * cfg.dt:.3f}")
            cur_rec.append(rec_i)
            cur_states.append(x.copy())
            rec_i += 1
        if k >= n_steps:
            break
        nxt = n_steps
        if pending:
            nxt = min(nxt, pending[0][0])
        if rec_i < len(rec_steps):
            nxt = min(nxt, int(rec_steps[rec_i]))
        x = seg.propagator(nxt - k) @ x
        k = nxt
    flush()

    n_t = len(rec_steps)
    n_bus, n_br = case.n_bus, len(case.branches)
    bus_f = np.empty((n_bus, n_t))
    mach_f = np.empty((G, n_t))
    coi = np.empty(n_t)
    flows = np.empty((n_br, n_t)) if cfg.store_flows else None
    inj = np.empty((n_bus, n_t)) if cfg.store_flows else None
    for sg, idx, X in segments:
        bf, mf, cf, fl, ij = sg.outputs(X, case, case.f0, cfg.store_flows)
        bus_f[:, idx], mach_f[:, idx], coi[idx] = bf, mf, cf
        if cfg.store_flows:
            flows[:, idx], inj[:, idx] = fl, ij

    return SimResult(
        t=rec_steps * cfg.dt,
        f0=case.f0,
        bus_ids=case.buses,
        bus_freq=bus_f,
        machine_freq=mach_f,
        coi_freq=coi,
        branch_flow=flows,
        bus_injection=inj,
        events=events,
        dt=cfg.dt * cfg.record_every,
        energy_segments=energy_segments,
    )


# -- oracles and measurement --------------------------------------------------


def coi_frequency(machine_freq, H, S_B=None) -> np.ndarray:
    """Inertia-weighted mean frequency of a machine set.

    Weights are ``H * S_B``; pass ``S_B=None`` to weight by ``H`` alone.
    """
    f = np.atleast_2d(np.asarray(machine_freq, dtype=float))
    w = np.asarray(H, dtype=float)
    if f.shape[0] == 0 or w.size == 0:
        raise DomainError("empty machine set")
    if S_B is not None:
        w = w * np.asarray(S_B, dtype=float)
    if not w.sum() > 0:
        raise DomainError("total COI weight must be > 0")
    return (w @ f) / w.sum()


def analytic_initial_rocof(case: GridCase, dP: float) -> float:
    """Aggregate RoCoF right after a ``dP`` MW power deficit, Hz/s."""
    E = system_kinetic_energy(case)
    if not E > 0:
        raise DomainError("system has no kinetic energy")
    return -dP * case.f0 / (2.0 * E)


def sample_pmu(result: SimResult, rate: float = 50.0, noise_sigma: float = 1e-3, seed: int = 0) -> FrequencyTrace:
    """Decimate bus frequencies to the PMU grid and add white measurement noise."""
    native = 1.0 / result.dt
    if rate > native * (1 + 1e-9):
        raise ConfigError(f"PMU rate {rate}/s exceeds simulation rate {native:.3f}/s")
    step = native / rate
    if abs(step - round(step)) > 1e-6:
        raise ConfigError(f"PMU rate {rate}/s does not divide simulation rate {native:.3f}/s")
    step = int(round(step))
    values = result.bus_freq[:, ::step].copy()
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values += rng.normal(0.0, noise_sigma, size=values.shape)
    return FrequencyTrace(float(result.t[0]), rate, values, result.bus_ids, noise_sigma)


def initial_coi_rocof(result: SimResult, event_index: int = 0) -> float:
    """Forward difference of the COI trace across the first record after an event."""
    t_ev = result.events[event_index].t
    k = int(np.searchsorted(result.t, t_ev - 1e-12))
    return float((result.coi_freq[k + 1] - result.coi_freq[k]) / (result.t[k + 1] - result.t[k]))


def summarize(result: SimResult, event_index: int = 0) -> dict:
    k = int(np.argmin(result.coi_freq))
    out = {
        "nadir_hz": float(result.coi_freq[k]),
        "t_nadir_s": float(result.t[k]),
        "kinetic_energy_mws": result.kinetic_energy_final,
    }
    if result.events:
        out["initial_coi_rocof_hzps"] = initial_coi_rocof(result, event_index)
    return out


def write_summary(result: SimResult, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summarize(result), indent=2, sort_keys=True) + "\n")
    return path
