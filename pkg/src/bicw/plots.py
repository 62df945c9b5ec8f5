"""Figure rendering for the CLI report paths (optional, --plot).

Figures are written next to the delimited output files; the data files stay
the primary artifact.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import ModelParams, free_energy
from .phase import EquilibriumPoint, SweepRow
from .simulate import EnsembleStats

__all__ = [
    "plot_trajectory",
    "plot_ensemble",
    "plot_sweep",
    "plot_equilibria",
]

_REGION_ORDER = ["A1", "A2", "B", "C1", "C2", "C3", "error"]
_STABILITY_STYLE = {
    "stable": ("o", "tab:green"),
    "saddle": ("s", "tab:orange"),
    "unstable": ("^", "tab:red"),
    "neutral": ("d", "tab:gray"),
}


def plot_trajectory(path: str | Path, times: np.ndarray, m: np.ndarray, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(times, m[:, 0], label="m1", lw=1.0)
    ax.plot(times, m[:, 1], label="m2", lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("magnetization")
    ax.set_ylim(-1.05, 1.05)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ensemble(path: str | Path, stats: EnsembleStats, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    sd = np.sqrt(stats.var)
    for j, label in enumerate(("m1", "m2")):
        ax.plot(stats.times, stats.mean[:, j], lw=1.2, label=f"mean {label}")
        ax.fill_between(
            stats.times,
            stats.mean[:, j] - sd[:, j],
            stats.mean[:, j] + sd[:, j],
            alpha=0.25,
            lw=0,
        )
    ax.set_xlabel("t")
    ax.set_ylabel("magnetization")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(path: str | Path, rows: list[SweepRow], title: str = "") -> None:
    a_vals = sorted({r.alpha_j11 for r in rows})
    j_vals = sorted({r.j12 for r in rows})
    a_pos = {v: i for i, v in enumerate(a_vals)}
    j_pos = {v: i for i, v in enumerate(j_vals)}
    code = {label: i for i, label in enumerate(_REGION_ORDER)}
    img = np.full((len(j_vals), len(a_vals)), np.nan)
    for r in rows:
        img[j_pos[r.j12], a_pos[r.alpha_j11]] = code.get(r.region, len(_REGION_ORDER) - 1)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(
        a_vals, j_vals, img, cmap="viridis", vmin=0, vmax=len(_REGION_ORDER) - 1,
        shading="nearest",
    )
    cbar = fig.colorbar(mesh, ax=ax, ticks=range(len(_REGION_ORDER)))
    cbar.ax.set_yticklabels(_REGION_ORDER)
    ax.set_xlabel("alpha * j11")
    ax.set_ylabel("j12")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_equilibria(
    path: str | Path, p: ModelParams, points: list[EquilibriumPoint], title: str = ""
) -> None:
    """Free-energy contours with the equilibria marked by stability."""
    grid = np.linspace(-0.995, 0.995, 201)
    surface = np.empty((grid.size, grid.size))
    for i, m2 in enumerate(grid):
        for j, m1 in enumerate(grid):
            surface[i, j] = free_energy((m1, m2), p)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    cs = ax.contourf(grid, grid, surface, levels=30, cmap="Greys_r")
    fig.colorbar(cs, ax=ax, label="free energy")
    seen = set()
    for q in points:
        marker, color = _STABILITY_STYLE[q.stability]
        label = q.stability if q.stability not in seen else None
        seen.add(q.stability)
        ax.plot(q.m1, q.m2, marker, color=color, ms=8, label=label)
    ax.set_xlabel("m1")
    ax.set_ylabel("m2")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
