"""Panel renderers for the phase-space flow figures.

Panel A: colourplot of (2/pi) arctan(div w) with the current J as arrows
(red for ordinary circulation, green where J opposes the classical current,
i.e. J . j < 0 — a rendering definition stated in the legend), the J_x and
J_p zero curves, stagnation markers, and the dashed W zero contour.

Panel B: fieldlines of J coloured by sign(W), the normalized current field
J/||J|| as black arrows, and the thick black W zero contour.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection

from .io import read_contours, read_fieldlines, read_grid_csv, read_stagnation

POSITIVE_COLOR = "tab:blue"   # fieldline vertices with W > 0
NEGATIVE_COLOR = "tab:red"    # fieldline vertices with W < 0


@dataclass(frozen=True)
class FigureSpec:
    indir: str
    panel: str                 # "A" | "B"
    cmap: str = "RdBu_r"
    arrow_step: int = 10       # grid stride between arrows
    dpi: int = 150

    def __post_init__(self):
        if self.panel not in ("A", "B"):
            raise ValueError(f"panel must be 'A' or 'B', got {self.panel!r}")
        if self.arrow_step < 1:
            raise ValueError("arrow_step must be >= 1")


def _arrow_slices(x: np.ndarray, p: np.ndarray, step: int):
    return np.ix_(np.arange(0, len(x), step), np.arange(0, len(p), step))


def render_panel_A(spec: FigureSpec, out_path: str) -> dict:
    """Divergence colourplot + classified arrows + curves + markers."""
    div = read_grid_csv(spec.indir, "divergence_grid.csv")
    cur = read_grid_csv(spec.indir, "current_grid.csv")
    contours = read_contours(spec.indir)
    points = read_stagnation(spec.indir)
    if not points:
        warnings.warn("stagnation file contains no points; rendering without markers")

    x, p = div["x"], div["p"]
    field = (2.0 / math.pi) * np.arctan(np.nan_to_num(div["divw"]))

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    mesh = ax.pcolormesh(x, p, field.T, cmap=spec.cmap, vmin=-1.0, vmax=1.0,
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label=r"$(2/\pi)\,\arctan(\nabla\cdot w)$")

    ix = _arrow_slices(x, p, spec.arrow_step)
    J_x, J_p = cur["J_x"][ix], cur["J_p"][ix]
    j_x, j_p = cur["j_x"][ix], cur["j_p"][ix]
    inverted = (J_x * j_x + J_p * j_p) < 0.0
    X, P = np.meshgrid(x[:: spec.arrow_step], p[:: spec.arrow_step], indexing="ij")
    n_green = int(np.count_nonzero(inverted))
    for mask, color, label in ((~inverted, "red", "current $J$"),
                               (inverted, "green", r"inverted ($J\cdot j<0$)")):
        if np.any(mask):
            ax.quiver(X[mask], P[mask], J_x[mask], J_p[mask], color=color,
                      width=0.003, label=label)

    for channel, style in (("J_x", dict(colors="0.4", lw=0.8)),
                           ("J_p", dict(colors="0.1", lw=0.8))):
        for poly in contours.get(channel, []):
            ax.plot(poly[:, 0], poly[:, 1], color=style["colors"],
                    lw=style["lw"], alpha=0.8)
    for poly in contours.get("W", []):
        ax.plot(poly[:, 0], poly[:, 1], "k--", lw=1.4)

    n_plus = n_minus = 0
    for q in points:
        if q["index"] >= 1:
            ax.plot(q["x"], q["p"], marker="x", color="red", ms=9, mew=2.2)
            n_plus += 1
        else:
            ax.plot(q["x"], q["p"], marker="_", color="gold", ms=12, mew=3.5)
            n_minus += 1

    ax.set_xlim(x[0], x[-1])
    ax.set_ylim(p[0], p[-1])
    ax.set_xlabel("$x$")
    ax.set_ylabel("$p$")
    ax.legend(loc="upper right", fontsize=8)
    fig.savefig(out_path, dpi=spec.dpi, bbox_inches="tight")
    plt.close(fig)
    return {"green_arrows": n_green,
            "markers_plus": n_plus, "markers_minus": n_minus,
            "colour_max": float(np.max(np.abs(field)))}


def render_panel_B(spec: FigureSpec, out_path: str) -> dict:
    """Fieldlines coloured by sign(W) + normalized arrows + W zero contour."""
    cur = read_grid_csv(spec.indir, "current_grid.csv")
    contours = read_contours(spec.indir)
    lines = read_fieldlines(spec.indir)

    x, p = cur["x"], cur["p"]
    fig, ax = plt.subplots(figsize=(7.0, 5.0))

    ix = _arrow_slices(x, p, spec.arrow_step)
    J_x, J_p = cur["J_x"][ix], cur["J_p"][ix]
    norm = np.hypot(J_x, J_p)
    norm[norm == 0.0] = 1.0
    X, P = np.meshgrid(x[:: spec.arrow_step], p[:: spec.arrow_step], indexing="ij")
    n_arrows = int(X.size)
    ax.quiver(X, P, J_x / norm, J_p / norm, color="black", width=0.0025,
              scale=40.0, alpha=0.7)

    two_color = 0
    for line in lines:
        verts = line["vertices"]
        if len(verts) < 2:
            continue
        signs = np.sign(line["W"])
        seg = np.stack([verts[:-1], verts[1:]], axis=1)
        seg_colors = [NEGATIVE_COLOR if s < 0 else POSITIVE_COLOR
                      for s in signs[:-1]]
        ax.add_collection(LineCollection(seg, colors=seg_colors, lw=1.3))
        if (signs > 0).any() and (signs < 0).any():
            two_color += 1

    for poly in contours.get("W", []):
        ax.plot(poly[:, 0], poly[:, 1], color="black", lw=2.8)

    ax.set_xlim(x[0], x[-1])
    ax.set_ylim(p[0], p[-1])
    ax.set_xlabel("$x$")
    ax.set_ylabel("$p$")
    fig.savefig(out_path, dpi=spec.dpi, bbox_inches="tight")
    plt.close(fig)
    return {"fieldlines": len(lines), "two_color_fieldlines": two_color,
            "arrows": n_arrows}


def render(spec: FigureSpec, out_path: str) -> dict:
    if spec.panel == "A":
        return render_panel_A(spec, out_path)
    return render_panel_B(spec, out_path)
