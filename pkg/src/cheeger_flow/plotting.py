"""Figures rendered next to the CSV/JSON artifacts of a run."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .identities import FlowTrace
from .surface import SurfaceProfile, curvature_of

_FIGSIZE = (7.0, 7.5)


def _style(ax, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3, lw=0.5)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)


def plot_trace(trace: FlowTrace, path: Path) -> Path:
    t = trace.column("t")
    fig = Figure(figsize=_FIGSIZE)
    ax_h, ax_a, ax_r = fig.subplots(3, 1, sharex=True)

    ax_h.plot(t, trace.column("h_sum_global"), label="sum form")
    ax_h.plot(t, trace.column("h_min_global"), ls="--", label="min form")
    ax_h.legend(frameon=False, fontsize=8)
    _style(ax_h, "", "Cheeger constant")

    area = trace.column("area")
    ax_a.plot(t, area, label="recorded")
    ax_a.plot(t, area[0] - 8 * np.pi * (t - t[0]), ls=":", color="k", label="A(0) - 8 pi t")
    ax_a.legend(frameon=False, fontsize=8)
    _style(ax_a, "", "area")

    ax_r.plot(t, trace.column("hamilton_at_min") / (4 * np.pi))
    ax_r.axhline(1.0, color="k", lw=0.8, ls=":")
    _style(ax_r, "t", "h L / 4 pi at minimizer")

    fig.suptitle(f"stop: {trace.stop_reason}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path


def plot_profiles(initial: SurfaceProfile, final: SurfaceProfile, path: Path) -> Path:
    fig = Figure(figsize=(7.0, 5.0))
    ax_u, ax_k = fig.subplots(2, 1, sharex=True)
    for p, style in ((initial, "-"), (final, "--")):
        th = p.grid.theta
        label = f"t = {p.time:.4g}"
        ax_u.plot(th, p.u, ls=style, label=label)
        ax_k.plot(th, curvature_of(p.grid, p.u), ls=style, label=label)
    ax_k.axhline(0.0, color="k", lw=0.6)
    ax_u.legend(frameon=False, fontsize=8)
    _style(ax_u, "", "u")
    _style(ax_k, "theta", "K")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path
