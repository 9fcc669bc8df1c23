"""Figure rendering for the CLI report path.

Renders the delimited outputs (field sweeps, characterization tables,
trajectories) to PNG files next to the CSVs. Uses the Agg backend so runs
are headless-safe.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_alpha_sweep_figure(alphas, B, path: str | Path) -> Path:
    """Component curves of the swept field at a fixed point (Fig-3b style)."""
    B = np.asarray(B, float)
    fig, ax = plt.subplots(figsize=(6, 4))
    for idx, label in ((0, "B_x"), (1, "B_y"), (2, "B_z")):
        ax.plot(alphas, B[:, idx] * 1e3, label=label)
    ax.plot(alphas, np.linalg.norm(B, axis=1) * 1e3, "k--", lw=1, label="|B|")
    ax.set_xlabel("oscillation angle alpha (deg)")
    ax.set_ylabel("flux density (mT)")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_grid_figure(samples, path: str | Path) -> Path:
    """Magnitude scatter of a grid sample set, colored by |B|."""
    pos = np.array([s.position for s in samples])
    mag = np.array([np.linalg.norm(s.B) for s in samples]) * 1e3
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    sc = ax.scatter(pos[:, 1] * 1e3, mag, c=mag, cmap="viridis", s=14)
    ax.set_xlabel("y (mm)")
    ax.set_ylabel("|B| (mT)")
    ax.grid(alpha=0.3)
    fig.colorbar(sc, ax=ax, label="|B| (mT)")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(rows: list[dict], path: str | Path) -> Path:
    """Stride/speed curve of a characterization sweep."""
    x = [r["x"] for r in rows]
    kind = rows[0]["kind"]
    fig, ax1 = plt.subplots(figsize=(6, 4))
    ax1.plot(x, [r["speed"] * 1e3 for r in rows], "o-", color="tab:blue", label="speed")
    ax1.set_xlabel({"alpha": "alpha_max (deg)", "pitch": "plane offset (m)", "frequency": "frequency (Hz)", "load": "cargo (kg)"}.get(kind, kind))
    ax1.set_ylabel("speed (mm/s)", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(x, [r["stride"] * 1e3 for r in rows], "s--", color="tab:orange", label="stride")
    ax2.set_ylabel("stride (mm/cycle)", color="tab:orange")
    ax1.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_trajectory_figure(traj, path: str | Path) -> Path:
    """Top-down path plot with anchor-switch markers."""
    pos = traj.positions() * 1e3
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.plot(pos[:, 0], pos[:, 2], "-", lw=1.2)
    ax.plot(pos[0, 0], pos[0, 2], "go", label="start")
    ax.plot(pos[-1, 0], pos[-1, 2], "rs", label="end")
    switches = [e for e in traj.events if e.kind == "anchor_switch"]
    if switches:
        times = np.array([s.time for s in traj.samples])
        idx = np.searchsorted(times, [e.time for e in switches])
        idx = np.clip(idx, 0, len(pos) - 1)
        ax.plot(pos[idx, 0], pos[idx, 2], ".", ms=3, color="gray", label="anchor switch")
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("z (mm)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.invert_yaxis()  # +z is the robot's right; show right-handed top view
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
