"""Optional matplotlib renderings. Import stays lazy so the numerical
code never needs a plotting backend."""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _atomic_savefig(fig, path) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path)) or "."
    suffix = os.path.splitext(path)[1] or ".png"
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=suffix)
    os.close(fd)
    try:
        fig.savefig(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def plot_density_1d(density, path, points: int = 801) -> None:
    plt = _pyplot()
    space = getattr(density, "space", None)
    lo, hi = (-1.0, 1.0)
    if space is not None:
        lo, hi = float(space.lower[0]), float(space.upper[0])
    x = np.linspace(lo, hi, points)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(x, density.pdf(x), lw=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    fig.tight_layout()
    _atomic_savefig(fig, path)
    plt.close(fig)


def _draw_polygon(ax, vertices, **kwargs):
    closed = np.vstack([vertices, vertices[:1]])
    ax.plot(closed[:, 0], closed[:, 1], **kwargs)


def plot_design(design, path, density=None, geometry: dict | None = None) -> None:
    """Scatter a design; overlay the density or tessellation when given.

    One-dimensional designs get the density curve with a point rug.
    Higher-dimensional designs are projected onto the first two axes.
    """
    plt = _pyplot()
    pts = design.points
    if design.dim == 1:
        fig, ax = plt.subplots(figsize=(6, 3.2))
        if density is not None:
            space = getattr(density, "space", None)
            lo, hi = (-1.0, 1.0)
            if space is not None:
                lo, hi = float(space.lower[0]), float(space.upper[0])
            grid = np.linspace(lo, hi, 801)
            ax.plot(grid, density.pdf(grid), lw=1.2)
        ax.plot(pts[:, 0], np.zeros(design.n), "|", ms=18, mew=1.4, color="C3")
        ax.set_xlabel("x")
        ax.set_ylabel("density")
    else:
        fig, ax = plt.subplots(figsize=(5, 5))
        if geometry is not None:
            for tile in geometry.get("tiles", []):
                _draw_polygon(ax, np.asarray(tile), color="0.7", lw=0.8)
            for sub in geometry.get("subtiles", []):
                _draw_polygon(ax, np.asarray(sub), color="C0", lw=0.8)
            sites = np.asarray(geometry.get("sites", []), dtype=float)
            if sites.size:
                ax.plot(sites[:, 0], sites[:, 1], "+", color="0.3", ms=8)
            radius = geometry.get("radius")
            if radius and sites.size:
                theta = np.linspace(0.0, 2.0 * math.pi, 120)
                for s in sites:
                    ax.plot(s[0] + radius * np.cos(theta),
                            s[1] + radius * np.sin(theta), color="C0", lw=0.8)
        ax.plot(pts[:, 0], pts[:, 1], "o", ms=3.5, color="C3", alpha=0.8)
        ax.set_aspect("equal")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        if design.dim > 2:
            ax.set_title(f"first two of {design.dim} coordinates")
    fig.tight_layout()
    _atomic_savefig(fig, path)
    plt.close(fig)


def plot_loss_histogram(values, path, bins: int = 30,
                        reference: float | None = None) -> None:
    plt = _pyplot()
    vals = np.asarray(values, dtype=float)
    vals = vals[np.isfinite(vals)]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.hist(vals, bins=bins, color="C0", alpha=0.85)
    if reference is not None and math.isfinite(reference):
        ax.axvline(reference, color="C3", lw=1.4, ls="--",
                   label="density max loss")
        ax.legend(frameon=False)
    ax.set_xlabel("per-replicate loss")
    ax.set_ylabel("count")
    fig.tight_layout()
    _atomic_savefig(fig, path)
    plt.close(fig)
