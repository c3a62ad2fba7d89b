"""Figure rendering for scan and curve outputs.

Figures are written next to the delimited output as PNG files; they are a
presentation aid and never feed back into any computation.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_scan", "render_curve"]


def render_scan(points, canonical_log10: float, path) -> None:
    """Cost landscape over the (n, delta) grid, one line per n."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    by_n: dict[int, list] = {}
    for p in points:
        by_n.setdefault(p.n, []).append(p)
    for n, pts in sorted(by_n.items()):
        pts = sorted(pts, key=lambda p: p.delta)
        ax.plot([p.delta for p in pts], [p.cost.log10_total for p in pts],
                label=f"n = {n}", lw=1.2)
    ax.axhline(canonical_log10, color="k", ls="--", lw=1.0, label="exponential weight")
    ax.set_xscale("log")
    ax.set_xlabel(r"width $\Delta$")
    ax.set_ylabel(r"$\log_{10}$ queries")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_curve(rows, path) -> None:
    """Query growth against system size for the three tracked curves."""
    rows = np.asarray(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(rows[:, 0], rows[:, 1], "o-", ms=3, lw=1.2, label="exponential weight")
    ax.plot(rows[:, 0], rows[:, 2], "s-", ms=3, lw=1.2, label="optimized ensemble")
    ax.plot(rows[:, 0], rows[:, 3], "k--", lw=1.0, label="search-bound scaling")
    ax.set_xlabel("sites N")
    ax.set_ylabel(r"$\log_{10}$ queries")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
