"""Vector-graphics emission for maps, detections and cross sections.

Every figure is written as SVG with a fixed hash salt, text rendered as
paths and no creation date, so repeated runs of the same config produce
byte-identical files.
"""
from __future__ import annotations

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .errors import ConfigError
from .texture import SpinTextureMap, scan_cross_section

_SVG_RC = {"svg.hashsalt": "slowquench", "svg.fonttype": "path"}
_KIND_STYLE = {"BIS": ("tab:red", "BIS"), "SIS": ("tab:blue", "SIS"),
               "ambiguous": ("tab:gray", "ambiguous")}


def _save(fig: Figure, path) -> None:
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def _axis_names(dim: int):
    return ["$k_x$", "$k_y$", "$k_z$"][:dim]


def plot_texture_1d(tex_map: SpinTextureMap, path, sets=()) -> None:
    """Line plot of the averaged spin components with zero-set markers."""
    if tex_map.grid.dim != 1:
        raise ConfigError("plot_texture_1d needs a 1D map")
    k = tex_map.grid.axis(0)
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot(111)
    labels = {0: r"$\langle\sigma_x\rangle$", 1: r"$\langle\sigma_y\rangle$",
              2: r"$\langle\sigma_z\rangle$"}
    comps = [0, 2] if tex_map.model.bands == 2 else list(range(4))
    for c in comps:
        ax.plot(k, tex_map.values[:, c], label=labels.get(c, f"comp {c}"))
    ax.axhline(0.0, color="0.7", lw=0.8, zorder=0)
    seen = set()
    for z in sets:
        color, label = _KIND_STYLE.get(z.kind, ("k", z.kind))
        for row in range(z.points.shape[0]):
            ax.axvline(float(z.points[row, 0]), color=color, ls=":",
                       lw=1.0, label=None if z.kind in seen else label)
            seen.add(z.kind)
    ax.set_xlabel(_axis_names(1)[0])
    ax.set_ylabel("time-averaged spin")
    ax.set_xlim(k[0], k[-1] + tex_map.grid.spacing(0))
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_texture_2d(tex_map: SpinTextureMap, path, sets=(),
                    arrows: int = 16) -> None:
    """Heatmap of the quench-axis average with zero-set overlays and a
    decimated quiver of the in-plane texture."""
    if tex_map.grid.dim != 2:
        raise ConfigError("plot_texture_2d needs a 2D map")
    kx = tex_map.grid.axis(0)
    ky = tex_map.grid.axis(1)
    fig = Figure(figsize=(6.0, 5.0))
    ax = fig.add_subplot(111)
    mesh = ax.pcolormesh(kx, ky, tex_map.quench_component().T,
                         shading="nearest", cmap="RdBu_r")
    fig.colorbar(mesh, ax=ax, label="quench-axis average")
    a_idx, b_idx = tex_map.transverse_indices[:2]
    step = max(1, len(kx) // arrows)
    sl = slice(step // 2, None, step)
    u = tex_map.values[sl, sl, a_idx]
    v = tex_map.values[sl, sl, b_idx]
    mkx, mky = np.meshgrid(kx[sl], ky[sl], indexing="ij")
    ax.quiver(mkx, mky, u, v, color="0.25", width=0.003, scale=18.0)
    seen = set()
    for z in sets:
        color, label = _KIND_STYLE.get(z.kind, ("k", z.kind))
        ax.plot(z.points[:, 0], z.points[:, 1], ".", ms=2.0, color=color,
                label=None if z.kind in seen else label)
        seen.add(z.kind)
    names = _axis_names(2)
    ax.set_xlabel(names[0])
    ax.set_ylabel(names[1])
    if seen:
        ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_cross_sections_3d(model, protocol, path, n: int = 61,
                           tol: float = 1e-8, component: int = 3,
                           planes=((0, 0.0), (1, 0.0), (2, np.pi / 2.0))) -> None:
    """Heatmaps of one texture component on axis-aligned slices of the
    3D zone, one panel per (plane_axis, plane_value) pair."""
    fig = Figure(figsize=(4.0 * len(planes), 3.6))
    names = ["k_x", "k_y", "k_z"]
    for p, (axis, value) in enumerate(planes):
        a1, a2, vals = scan_cross_section(model, protocol, axis, value, n, tol)
        ax = fig.add_subplot(1, len(planes), p + 1)
        mesh = ax.pcolormesh(a1, a2, vals[..., component].T,
                             shading="nearest", cmap="RdBu_r")
        fig.colorbar(mesh, ax=ax)
        free = [a for a in range(3) if a != axis]
        ax.set_xlabel(f"${names[free[0]]}$")
        ax.set_ylabel(f"${names[free[1]]}$")
        ax.set_title(f"$\\langle\\gamma_{component}\\rangle$ at "
                     f"${names[axis]} = {value:.4g}$", fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def plot_single_sweep(g_values, p_closed, p_numeric, spin_closed,
                      spin_numeric, path) -> None:
    """Transition probability and averaged-spin components against the
    coupling, closed form as lines and numeric results as points."""
    g = np.asarray(g_values, dtype=float)
    fig = Figure(figsize=(8.0, 3.6))
    ax1 = fig.add_subplot(121)
    ax1.plot(g, np.asarray(p_closed), "-", color="tab:blue", label="closed form")
    ax1.plot(g, np.asarray(p_numeric), "o", ms=3.5, color="tab:red",
             label="numeric")
    ax1.set_xlabel("$g$")
    ax1.set_ylabel("$P$")
    ax1.legend(fontsize=8)
    ax2 = fig.add_subplot(122)
    sc = np.asarray(spin_closed)
    sn = np.asarray(spin_numeric)
    for i, lab in enumerate(("x", "y", "z")):
        ax2.plot(g, sc[:, i], "-", label=f"$\\bar s_{lab}$")
        ax2.plot(g, sn[:, i], "o", ms=3.0)
    ax2.set_xlabel("$g$")
    ax2.set_ylabel("time-averaged spin")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
