"""Deterministic CSV/JSON artifacts plus SVG figures for pipeline runs and sweeps."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .errors import IoError

log = logging.getLogger(__name__)

FLOAT_FMT = "{:.9g}"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    return v


def prepare_dir(outdir) -> Path:
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise IoError(str(outdir), exc.strerror or str(exc)) from None
    return outdir


def write_csv(path: Path, header, rows) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise IoError(str(path), exc.strerror or str(exc)) from None
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not np.isfinite(v) else float(FLOAT_FMT.format(v))
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value"):
        return obj.value
    return obj


def write_json(path: Path, doc) -> Path:
    try:
        path.write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoError(str(path), exc.strerror or str(exc)) from None
    return path


# -- pipeline run -------------------------------------------------------------


def _trace_rows(trace, stride):
    t = trace.times
    for j in range(0, trace.n_samples, stride):
        yield [t[j], *trace.values[:, j]]


def emit_artifacts(report, outdir) -> list[Path]:
    """Write every artifact of a pipeline run; return the paths in write order."""
    from . import plotting
    from .scenario import config_to_dict

    out = prepare_dir(outdir)
    cfg = report.config
    files = []
    trace = report.trace
    buses = list(trace.bus_ids)

    stride = cfg.outputs.trace_stride
    files.append(write_csv(
        out / "traces.csv",
        ["time_s", *(f"bus_{b}_hz" for b in buses)],
        _trace_rows(trace, stride),
    ))

    events = report.events
    mean_idi = {b: float(np.mean([e.idi.idi[b] for e in events])) if events else float("nan") for b in buses}
    mean_dist = {b: float(np.mean([e.idi.dist[b] for e in events])) if events else float("nan") for b in buses}
    files.append(write_csv(
        out / "idi.csv", ["bus", "mean_dist_hz2s", "mean_idi"],
        ([b, mean_dist[b], mean_idi[b]] for b in buses),
    ))
    files.append(write_csv(
        out / "idi_events.csv", ["event", "T0_s", "bus", "dist_hz2s", "idi", "coi_bus", "in_cluster"],
        ([e.index, e.T0, b, e.idi.dist[b], e.idi.idi[b], e.cluster.k_coi, int(b in e.cluster.members)]
         for e in events for b in buses),
    ))

    totals = {b: 0 for b in buses}
    for w in report.windows:
        for b, v in w.counts.items():
            totals[b] += v
    files.append(write_csv(out / "counts.csv", ["bus", "count"], ([b, totals[b]] for b in buses)))
    files.append(write_csv(
        out / "window_counts.csv", ["window_start_s", "window_end_s", "bus", "count"],
        ([w.window[0], w.window[1], b, w.counts.get(b, 0)] for w in report.windows for b in buses),
    ))

    est = []
    for e in events:
        row = {
            "index": e.index,
            "T0_s": e.T0,
            "phantom": e.phantom,
            "injected": None if e.source is None else {
                "t_s": e.source.t, "bus": e.source.bus, "dP_mw": e.source.dP, "kind": e.source.kind.value,
            },
            "coi_bus": e.cluster.k_coi,
            "cluster": sorted(e.cluster.members),
            "delta_hz2s": e.cluster.delta,
            "truth_mws": e.truth,
            "window": None if e.window is None else list(e.window),
        }
        if e.single is not None:
            row["single"] = e.single.to_dict(e.truth)
            row["dynamic"] = e.dynamic.to_dict(e.truth)
            row["p_distance_ok"] = e.p_distance_ok
        est.append(row)
    files.append(write_json(out / "estimates.json", {
        "case": report.case_name,
        "truth_mws": report.truth,
        "events": est,
        "windows": [
            {"window": list(w.window), "k_coi": w.k_coi_win, "p_bus": w.p_bus,
             "C_k": w.C_k, "C_p": w.C_p, "events": w.events_seen}
            for w in report.windows
        ],
    }))
    files.append(write_json(out / "summary.json", {
        "case": report.case_name,
        "truth_mws": report.truth,
        "injected_events": len(report.injected),
        "detected_events": len(events),
        "phantom_events": sum(e.phantom for e in events),
        "estimated_events": len(report.estimated),
        "skipped": [{"T0_s": t, "reason": why} for t, why in report.skipped],
        "mae_single_pct": report.mae_single,
        "mae_dynamic_pct": report.mae_dynamic,
        "simulation": report.summary,
        "config": config_to_dict(cfg),
    }))

    if cfg.outputs.plots:
        files.append(plotting.frequency_overlay(
            trace, out / "frequency.svg", filtered=report.filtered,
            coi=(report.result.t, report.result.coi_freq) if report.result is not None else None,
        ))
        files.append(plotting.idi_bars(mean_idi, out / "idi.svg"))
        files.append(plotting.count_bubbles(totals, out / "counts.svg", case=_case_for(cfg)))

    for p in files:
        log.info("wrote %s", p)
    return files


def _case_for(cfg):
    from .grid_model import load_case

    try:
        return load_case(cfg.case_path)
    except Exception:  # layout only; the run already validated the case
        return None


# -- sweeps -------------------------------------------------------------------


def emit_integration_sweep(sweep, outdir) -> list[Path]:
    from . import plotting

    out = prepare_dir(outdir)
    files = [
        write_csv(out / "sweep_t.csv", ["T_s", "bus", "mean_idi"], sweep.rows()),
        write_json(out / "sweep_t.json", {
            "T_values_s": sweep.T_values,
            "coi_bus": {str(T): b for T, b in sweep.coi_bus.items()},
            "optimal_T_s": sweep.optimal_T,
            "events": sweep.n_events,
        }),
        plotting.idi_vs_T(sweep, out / "sweep_t.svg"),
    ]
    for p in files:
        log.info("wrote %s", p)
    return files


def emit_penetration_sweep(sweep, outdir) -> list[Path]:
    from . import plotting

    out = prepare_dir(outdir)
    header = ["case", "replaced_buses", "penetration_pct", "energy_pre_mws", "energy_post_mws",
              "initial_rocof_hzps", "nadir_hz", "t_nadir_s"]
    rows = (
        [i, " ".join(map(str, r.buses)), 100.0 * r.penetration, r.energy_pre, r.energy_post,
         r.initial_rocof, r.nadir, r.t_nadir]
        for i, r in enumerate(sweep.rows)
    )
    files = [
        write_csv(out / "sweep_penetration.csv", header, rows),
        plotting.penetration_overlay(sweep, out / "sweep_penetration.svg"),
    ]
    for p in files:
        log.info("wrote %s", p)
    return files


def emit_coi_shift(shift, outdir) -> list[Path]:
    from . import plotting
    from .grid_model import load_case

    out = prepare_dir(outdir)
    buses = sorted(shift.counts[0])
    files = [
        write_csv(
            out / "coi_shift.csv", ["bus", *(f"case_{i}" for i in range(len(shift.bus_sets)))],
            ([b, *(c[b] for c in shift.counts)] for b in buses),
        ),
        write_json(out / "coi_shift.json", {
            "cases": [
                {"replaced": list(s), "mae_single_pct": r.mae_single, "mae_dynamic_pct": r.mae_dynamic,
                 "counts": {str(b): c[b] for b in buses}}
                for s, r, c in zip(shift.bus_sets, shift.reports, shift.counts)
            ]
        }),
    ]
    case = load_case(shift.reports[0].config.case_path)
    for i, (s, c) in enumerate(zip(shift.bus_sets, shift.counts)):
        files.append(plotting.count_bubbles(
            c, out / f"coi_shift_case_{i}.svg", case=case, highlight=s,
            title=f"COI-area counts, replaced {list(s) or 'none'}",
        ))
    for p in files:
        log.info("wrote %s", p)
    return files
