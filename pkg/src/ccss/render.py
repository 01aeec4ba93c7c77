"""PNG rendering of silhouettes and scale-space images.

Scatter plots put deck position (or arc position for the zero-crossing
form) on x and the smoothing level on y. Point families are drawn in
separate colors; faint segments link each point to the nearest-x point
one row up, purely as a reading aid (matching never links rows).
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .contour import Silhouette, smooth
from .scalespace import CCSSImage, CSSImage


def _link_rows(ax, rows, sigmas, color):
    for r in range(1, len(rows)):
        prev, cur = rows[r - 1], rows[r]
        if len(prev) == 0 or len(cur) == 0:
            continue
        for x in cur[:, 0]:
            j = int(np.abs(prev[:, 0] - x).argmin())
            if abs(prev[j, 0] - x) < 0.05:
                ax.plot(
                    [prev[j, 0], x],
                    [sigmas[r - 1], sigmas[r]],
                    color=color,
                    alpha=0.25,
                    linewidth=0.6,
                    zorder=1,
                )


def render_ccss(img: CCSSImage, out_path: str, title: str = "") -> None:
    """Scatter of both point families over the smoothing schedule."""
    fig, ax = plt.subplots(figsize=(8, 5))
    sig = img.sigmas
    for rows, color, label in (
        (img.max_rows, "tab:blue", "convexities"),
        (img.min_rows, "tab:red", "concavities"),
    ):
        xs, ys = [], []
        for r, row in enumerate(rows):
            xs.extend(row[:, 0])
            ys.extend([sig[r]] * len(row))
        ax.scatter(xs, ys, s=8, color=color, label=label, zorder=2)
        _link_rows(ax, rows, sig, color)
    ax.set_xlim(-0.02, 1.02)
    ax.set_xlabel("deck position")
    ax.set_ylabel("smoothing sigma (arc-length units)")
    ax.legend(loc="upper right")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def render_css(css: CSSImage, out_path: str, title: str = "") -> None:
    """Scatter of zero-crossing arc positions over the schedule."""
    fig, ax = plt.subplots(figsize=(8, 5))
    xs, ys = [], []
    for r, row in enumerate(css.rows):
        xs.extend(row)
        ys.extend([css.sigmas[r]] * len(row))
    ax.scatter(xs, ys, s=6, color="black")
    ax.set_xlim(-0.02, 1.02)
    ax.set_xlabel("normalized arc position")
    ax.set_ylabel("smoothing sigma (arc-length units)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def render_evolution(sil: Silhouette, sigmas: tuple[float, float, float], out_path: str) -> None:
    """Three panels of the silhouette at increasing smoothing levels."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.2))
    for ax, sigma in zip(axes, sigmas):
        pts = smooth(sil, sigma).points
        closed = np.vstack([pts, pts[:1]])
        ax.plot(closed[:, 0], closed[:, 1], color="black", linewidth=1.0)
        ax.set_aspect("equal")
        ax.invert_yaxis()  # image row coordinates: deck up
        ax.set_title(f"sigma = {sigma:.4f}")
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def render_silhouette(sil: Silhouette, out_path: str, title: str = "") -> None:
    """Single-panel outline of a silhouette."""
    fig, ax = plt.subplots(figsize=(7, 2.6))
    closed = np.vstack([sil.points, sil.points[:1]])
    ax.plot(closed[:, 0], closed[:, 1], color="black", linewidth=1.0)
    ax.set_aspect("equal")
    ax.invert_yaxis()
    ax.set_xticks([])
    ax.set_yticks([])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)
