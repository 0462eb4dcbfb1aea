import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from inertia_scope.errors import (
    ConfigError,
    DegenerateEventError,
    DomainError,
    EmptyWindowError,
    NearZeroRocofError,
    NoBoundaryError,
    WindowError,
)
from inertia_scope.inertia_est import (
    CoiCluster,
    CoiProxy,
    EstimateMethod,
    IdiConfig,
    IdiReport,
    WindowStats,
    coi_bus,
    coi_cluster,
    electrical_distance,
    estimate_inertia,
    idi_profile,
    normalize,
    p_bus_qualifies,
    regional_delta_p,
    weighted_rocof,
    window_accumulate,
)
from inertia_scope.swing_sim import FrequencyTrace

RATE = 50.0
T = np.arange(200) / RATE


def bus_trace(amps, freq=0.8):
    """Buses oscillating in phase about 60 Hz with the given amplitudes after t = 1 s."""
    s = np.clip(T - 1.0, 0, None)
    rows = [60.0 + a * np.sin(2 * np.pi * freq * s) for a in amps]
    return FrequencyTrace(0.0, RATE, np.vstack(rows), tuple(range(1, len(amps) + 1)))


def test_distance_by_hand():
    # constant 0.01 Hz gap over 0.2 s
    d = electrical_distance(np.full(200, 60.01), np.full(200, 60.0), T, 1.0, IdiConfig(T=0.2, t_d=0.1))
    assert d == pytest.approx(0.01**2 * 0.2)


@given(c=st.floats(0.1, 10.0), amp=st.floats(1e-3, 0.05))
def test_distance_scales_quadratically(c, amp):
    a = 60 + amp * np.sin(2 * np.pi * 0.7 * T)
    base = electrical_distance(a, np.full_like(T, 60.0), T, 1.0)
    scaled = electrical_distance(60 + c * (a - 60), np.full_like(T, 60.0), T, 1.0)
    assert scaled == pytest.approx(c * c * base, rel=1e-9)


@given(amp=st.floats(0.0, 0.02), fq=st.floats(0.1, 1.0), ph=st.floats(0, 2 * np.pi),
       T_int=st.floats(0.1, 0.5), t_d=st.floats(0.0, 0.3))
def test_distance_against_fine_grid(amp, fq, ph, T_int, t_d):
    g = lambda t: amp * np.sin(2 * np.pi * fq * t + ph)  # noqa: E731
    cfg = IdiConfig(T=T_int, t_d=t_d)
    d = electrical_distance(60 + g(T), np.full_like(T, 60.0), T, 1.0, cfg)
    fine = np.linspace(1.0 + t_d, 1.0 + t_d + T_int, 200001)
    assert d == pytest.approx(np.trapezoid(g(fine) ** 2, fine), abs=1e-6)


def test_window_must_fit_record():
    with pytest.raises(WindowError):
        electrical_distance(np.full(200, 60.0), np.full(200, 60.0), T, 3.8)


def test_idi_config_bounds():
    with pytest.raises(ConfigError):
        IdiConfig(T=0.6)
    with pytest.raises(ConfigError):
        IdiConfig(T=0.0)
    assert IdiConfig(coi_proxy="GroundTruth").coi_proxy is CoiProxy.GROUND_TRUTH


@given(st.lists(st.floats(0.0, 0.05), min_size=2, max_size=8))
def test_idi_normalized(amps):
    assume(max(amps) - min(amps) > 1e-4)
    rep = idi_profile(bus_trace(amps), 1.0)
    vals = np.array(list(rep.idi.values()))
    assert vals.max() == pytest.approx(1.0)
    assert np.all((vals >= 0) & (vals <= 1))


def test_identical_traces_are_degenerate():
    with pytest.raises(DegenerateEventError):
        idi_profile(bus_trace([0.01, 0.01, 0.01]), 1.0)
    with pytest.raises(DegenerateEventError):
        normalize({1: 0.0, 2: 0.0})


def test_ground_truth_reference():
    tr = bus_trace([0.0, 0.02, 0.04])
    rep = idi_profile(tr, 1.0, IdiConfig(coi_proxy="GroundTruth"), coi_ref=tr.series(2))
    assert coi_bus(rep) == 2 and rep.idi[2] == 0.0
    with pytest.raises(ConfigError):
        idi_profile(tr, 1.0, IdiConfig(coi_proxy="GroundTruth"))


def test_mean_proxy_picks_middle_bus():
    rep = idi_profile(bus_trace([0.0, 0.02, 0.04]), 1.0)
    assert coi_bus(rep) == 2


@given(st.permutations([1, 2, 3, 4, 5]))
def test_argmin_tie_break_lowest_id(order):
    idi = {b: (0.0 if b in (3, 5) else 0.5 + 0.1 * b) for b in order}
    assert coi_bus(IdiReport(0.0, idi, idi)) == 3


@given(st.floats(0.0, 1e-4), st.floats(0.0, 1e-4))
def test_cluster_monotone_in_delta(d1, d2):
    tr = bus_trace([0.0, 0.005, 0.01, 0.02, 0.04])
    lo, hi = sorted((d1, d2))
    a = coi_cluster(tr, 1, 1.0, lo)
    b = coi_cluster(tr, 1, 1.0, hi)
    assert a.members <= b.members
    assert 1 in a.members


def test_cluster_relative_delta():
    tr = bus_trace([0.0, 0.005, 0.01, 0.02, 0.04])
    c = coi_cluster(tr, 1, 1.0, delta=None, delta_fraction=0.1)
    assert c.delta == pytest.approx(0.1 * max(c.dist.values()))
    # distances scale with amplitude squared: 0.0125^2 of 0.04^2 is inside, 0.02 is not
    assert c.members == frozenset({1, 2, 3})


def _cluster(T0, members, k=None):
    return CoiCluster(k or min(members), 0.0, frozenset(members), T0)


def test_window_counts_and_ranking():
    cl = [_cluster(10, {1, 2}), _cluster(20, {2, 3}), _cluster(30, {2, 3, 4})]
    st_ = window_accumulate(cl, (0, 600), bus_ids=[1, 2, 3, 4, 5])
    assert st_.counts == {1: 1, 2: 3, 3: 2, 4: 1, 5: 0}
    assert (st_.k_coi_win, st_.p_bus, st_.C_k, st_.C_p, st_.events_seen) == (2, 3, 3, 2, 3)


def test_window_ties_go_to_lowest_id():
    st_ = window_accumulate([_cluster(5, {4, 9})], (0, 600))
    assert (st_.k_coi_win, st_.p_bus) == (4, 9)


def test_window_errors():
    with pytest.raises(EmptyWindowError):
        window_accumulate([], (0, 600))
    with pytest.raises(ConfigError):
        window_accumulate([_cluster(700, {1})], (0, 600))


def _stats(C_k, C_p):
    return WindowStats((0, 600), {1: C_k, 2: C_p}, 1, 2, C_k)


@pytest.mark.parametrize("C_k,C_p,expected", [(5, 3, True), (10, 6, True), (10, 5, False), (5, 2, False)])
def test_threshold_at_ratio(C_k, C_p, expected):
    assert p_bus_qualifies(_stats(C_k, C_p), 0.6) is expected


def test_threshold_exactly_point_six_blends():
    # 3/5 == 0.6 exactly: the second bus must be blended in
    r = weighted_rocof(_stats(5, 3), -0.10, -0.20, 0.6)
    assert r == pytest.approx(5 / 8 * -0.10 + 3 / 8 * -0.20)
    assert weighted_rocof(_stats(10, 5), -0.10, -0.20, 0.6) == -0.10


@given(C_k=st.integers(1, 40), frac=st.floats(0.6, 1.0), rk=st.floats(-1, 1), rp=st.floats(-1, 1))
def test_weighted_rocof_between(C_k, frac, rk, rp):
    C_p = max(1, min(C_k, int(np.ceil(frac * C_k))))
    r = weighted_rocof(_stats(C_k, C_p), rk, rp, 0.6)
    assert min(rk, rp) - 1e-12 <= r <= max(rk, rp) + 1e-12


def test_distance_criterion_blocks_blend():
    assert weighted_rocof(_stats(5, 5), -0.1, -0.3, 0.6, p_distance_ok=False) == -0.1


def test_missing_p_rocof_is_error():
    with pytest.raises(ConfigError):
        weighted_rocof(_stats(5, 4), -0.1, None)
    with pytest.raises(DomainError):
        weighted_rocof(WindowStats((0, 1), {1: 0}, 1, None, 0), -0.1)


@given(E=st.floats(1e3, 1e5), dP=st.floats(-500, 500).filter(lambda x: abs(x) > 1))
def test_estimate_inverts_rocof(E, dP):
    rocof = -dP * 60.0 / (2 * E)
    assume(abs(rocof) >= 1e-4)
    est = estimate_inertia(rocof, dP, 60.0)
    assert est.E_est == pytest.approx(E, rel=1e-12)
    assert est.method is EstimateMethod.SINGLE_EVENT


def test_estimate_guards():
    with pytest.raises(NearZeroRocofError):
        estimate_inertia(5e-5, -50.0, 60.0)
    with pytest.raises(DomainError):
        estimate_inertia(-0.1, 0.0, 60.0)
    d = estimate_inertia(-0.05, -52.56, 60.0, "DynamicWeighted").to_dict(truth=31525.0)
    assert d["method"] == "DynamicWeighted"
    assert d["pct_error_vs_truth"] == pytest.approx(100 * (31536.0 - 31525.0) / 31525.0)


def test_regional_delta_p():
    t = np.arange(0, 3, 0.02)
    flows = np.vstack([np.where(t >= 1.0, 30.0, 10.0), np.where(t >= 1.0, -5.0, 0.0)])
    assert regional_delta_p(t, flows, 1.0, 0.1, [1, -1]) == pytest.approx(20.0 + 5.0)
    with pytest.raises(NoBoundaryError):
        regional_delta_p(t, np.empty((0, len(t))), 1.0, 0.1)
    with pytest.raises(WindowError):
        regional_delta_p(t, flows, 0.0, 0.1)
