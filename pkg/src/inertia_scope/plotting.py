"""SVG figures. Rendered off-screen with fixed metadata so reruns diff cleanly."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import IoError  # noqa: E402

plt.rcParams["svg.hashsalt"] = "inertia-scope"
_META = {"Date": None, "Creator": None}


def _save(fig, path) -> Path:
    path = Path(path)
    try:
        fig.savefig(path, format="svg", metadata=_META)
    except OSError as exc:
        raise IoError(str(path), exc.strerror or str(exc)) from None
    finally:
        plt.close(fig)
    return path


def frequency_overlay(trace, path, filtered=None, coi=None, max_points=20000) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    step = max(1, trace.n_samples // max_points)
    t = trace.times[::step]
    for b in trace.bus_ids:
        ax.plot(t, trace.series(b)[::step], lw=0.4, alpha=0.5, color="0.6")
    if filtered is not None:
        for b in filtered.bus_ids:
            ax.plot(t, filtered.series(b)[::step], lw=0.6)
    if coi is not None:
        tc, fc = coi
        s = max(1, len(tc) // max_points)
        ax.plot(tc[::s], fc[::s], color="k", lw=1.2, label="COI")
        ax.legend(loc="lower right")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("frequency (Hz)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def idi_bars(mean_idi: dict, path) -> Path:
    buses = sorted(mean_idi)
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.bar([str(b) for b in buses], [mean_idi[b] for b in buses], color="tab:blue")
    ax.set_xlabel("bus")
    ax.set_ylabel("mean IDI")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    return _save(fig, path)


def _layout(buses):
    ang = 2 * np.pi * np.arange(len(buses)) / len(buses)
    return {b: (np.cos(a), np.sin(a)) for b, a in zip(buses, ang)}


def count_bubbles(counts: dict, path, case=None, highlight=(), title="COI-area counts") -> Path:
    buses = sorted(counts)
    pos = _layout(buses)
    fig, ax = plt.subplots(figsize=(6, 6))
    if case is not None:
        for br in case.branches:
            if br.from_bus in pos and br.to_bus in pos:
                (x0, y0), (x1, y1) = pos[br.from_bus], pos[br.to_bus]
                ax.plot([x0, x1], [y0, y1], color="0.8", lw=0.6, zorder=1)
    top = max(max(counts.values()), 1)
    hi = set(highlight)
    for b in buses:
        x, y = pos[b]
        ax.scatter(x, y, s=30 + 900 * counts[b] / top, zorder=2, alpha=0.7,
                   color="tab:red" if b in hi else "tab:blue")
        ax.annotate(str(b), (x * 1.13, y * 1.13), ha="center", va="center", fontsize=8)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def idi_vs_T(sweep, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    T = sweep.T_values
    buses = sorted(sweep.mean_idi[T[0]])
    for b in buses:
        ax.plot(T, [sweep.mean_idi[t][b] for t in T], marker="o", ms=3, lw=0.8, label=str(b))
    ax.axvline(sweep.optimal_T, color="k", ls="--", lw=0.8)
    ax.set_xlabel("integration period T (s)")
    ax.set_ylabel("mean IDI")
    ax.legend(ncol=6, fontsize=6)
    fig.tight_layout()
    return _save(fig, path)


def penetration_overlay(sweep, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for row, (t, f) in zip(sweep.rows, sweep.traces):
        ax.plot(t, f, lw=1.0, label=f"{100 * row.penetration:.0f} %")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("COI frequency (Hz)")
    ax.legend(title="penetration")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)
