"""Figure rendering for snapshots and diagnostics time series."""

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class RenderError(Exception):
    pass


def render_field(values, out_path, title="", cmap="viridis"):
    """Single heatmap of one 2D field; returns (vmin, vmax).

    The array's axis 0 is x and axis 1 is y, so it is transposed for
    imshow and drawn with the origin at the lower-left corner.
    """
    values = np.asarray(values)
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(values.T, origin="lower", extent=(0, 1, 0, 1), cmap=cmap)
    fig.colorbar(im, ax=ax)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return float(values.min()), float(values.max())


def render_snapshot(snap, out_path, quiver_step=None):
    """Three-panel figure (rho, |v| with quiver, c); returns panel ranges.

    1D snapshots are drawn as line plots in the same layout.
    """
    rho = snap.fields["rho"]
    c = snap.concentration()
    v = snap.velocity()
    ranges = {}
    if snap.dim == 1:
        fig, axes = plt.subplots(1, 3, figsize=(12, 3.2))
        x = snap.cell_centers()
        for ax, (name, data) in zip(
                axes, (("rho", rho), ("v", v[0]), ("c", c))):
            ax.plot(x, data)
            ax.set_title(name)
            ax.set_xlabel("x")
            ranges[name] = (float(data.min()), float(data.max()))
    else:
        speed = np.sqrt(v[0]**2 + v[1]**2)
        fig, axes = plt.subplots(1, 3, figsize=(12.5, 3.6))
        panels = (("rho", rho, "viridis"), ("|v|", speed, "magma"),
                  ("c", c, "coolwarm"))
        for ax, (name, data, cmap) in zip(axes, panels):
            im = ax.imshow(data.T, origin="lower", extent=(0, 1, 0, 1),
                           cmap=cmap)
            fig.colorbar(im, ax=ax, shrink=0.9)
            ax.set_title(name)
            ranges[name] = (float(data.min()), float(data.max()))
        step = quiver_step or max(1, snap.M // 16)
        xq = snap.cell_centers()[::step]
        Xq, Yq = np.meshgrid(xq, xq, indexing="ij")
        axes[1].quiver(Xq, Yq, v[0][::step, ::step], v[1][::step, ::step],
                       color="white", width=0.004)
    fig.suptitle(f"t = {snap.t:.6g}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return ranges


def read_diagnostics(path):
    """Diagnostics CSV as {column: float array}; errors on empty files."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise RenderError(f"{path}: empty diagnostics file")
    header, data = rows[0], rows[1:]
    if not data:
        raise RenderError(f"{path}: no data rows")
    cols = {name: np.array([float(r[i]) for r in data])
            for i, name in enumerate(header)}
    return cols


def render_timeseries(csv_path, columns, out_path, logscale=None):
    """Plot named diagnostics columns against t; returns {column: array}."""
    cols = read_diagnostics(csv_path)
    missing = [c for c in columns if c not in cols]
    if missing:
        raise RenderError(
            f"missing columns {missing}; available: {sorted(cols)}")
    t = cols.get("t")
    if t is None:
        raise RenderError(f"{csv_path}: no 't' column")
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in columns:
        ax.plot(t, cols[name], label=name)
    ax.set_xlabel("t")
    ax.legend()
    if logscale:
        ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return {name: cols[name] for name in columns}
