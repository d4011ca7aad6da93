import numpy as np
from matplotlib import cm, colors, rc_context
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure

from replicoal.models.core import SimplexPoint

TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
"""Planar positions of the three simplex vertices."""

SVG_RC = {"svg.hashsalt": "replicoal", "svg.fonttype": "path"}


def project_simplex(points: np.ndarray) -> np.ndarray:
    """
    Barycentric projection of points on the 3-type simplex onto a planar triangle.

    Args:
        points: shape (N, 3), rows summing to 1.

    Returns: shape (N, 2).
    """
    assert points.ndim == 2 and points.shape[1] == 3, "ternary projection needs three types"
    return points @ TRIANGLE


def plot_simplex(
    paths: list[tuple[np.ndarray, np.ndarray]],
    x_star: SimplexPoint | None,
    out_path: str,
    *,
    title: str = "",
) -> None:
    """
    Draw frequency paths on the ternary simplex, coloured by block count, as a self-contained SVG.

    Args:
        paths: per trajectory, block counts of shape (N,) and frequencies of shape (N, 3).
        x_star: stable state, drawn as a star.
        out_path: SVG file to write.
        title: figure title.
    """
    assert paths, "nothing to plot"
    fig = Figure(figsize=(7, 6.2))
    ax = fig.add_subplot()
    ax.plot(*TRIANGLE[[0, 1, 2, 0]].T, color="k", linewidth=1)
    offsets = ((-0.06, -0.05), (0.01, -0.05), (-0.04, 0.02))
    for i, ((x, y), (dx, dy)) in enumerate(zip(TRIANGLE, offsets)):
        ax.annotate(f"type {i + 1}", (x + dx, y + dy), annotation_clip=False)

    log_sigma = [np.log10(np.maximum(sigma, 1.0)) for sigma, _ in paths]
    lo = min(float(np.min(ls)) for ls in log_sigma)
    hi = max(float(np.max(ls)) for ls in log_sigma)
    norm = colors.Normalize(vmin=lo, vmax=max(hi, lo + 1))
    for (sigma, r), ls in zip(paths, log_sigma):
        xy = project_simplex(r)
        segments = np.stack([xy[:-1], xy[1:]], axis=1)
        lc = LineCollection(list(segments), cmap="viridis", norm=norm, linewidth=1.2)
        lc.set_array((ls[:-1] + ls[1:]) / 2)
        ax.add_collection(lc)
        ax.plot(*xy[0], marker="o", markersize=3, color="k")
    if x_star is not None:
        ax.plot(*project_simplex(x_star[None, :])[0], marker="*", markersize=14, color="crimson", label="stable state")
        ax.legend(loc="upper right", frameon=False)

    cbar = fig.colorbar(cm.ScalarMappable(norm=norm, cmap="viridis"), ax=ax, shrink=0.8)
    cbar.set_label("log10 block count (colour)")
    ax.set_xlim(-0.1, 1.1)
    ax.set_ylim(-0.1, 1.0)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title)
    with rc_context(SVG_RC):
        fig.savefig(out_path, format="svg", metadata={"Date": None})
