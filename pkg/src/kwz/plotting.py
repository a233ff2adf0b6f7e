"""SVG drawing of a planar decomposition."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
# reproducible element ids
matplotlib.rcParams["svg.hashsalt"] = "kwz"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

from .unfolding import PlanarDecomposition  # noqa: E402


def plot_decomposition(pd: PlanarDecomposition, ax=None, labels: bool = True):
    """Draw triangles, face points, corner segments and middle paths."""
    if ax is None:
        _, ax = plt.subplots(figsize=(8, 8))
    d = pd.immersion.dual
    for u, tri in enumerate(pd.corners):
        ax.add_patch(Polygon(np.column_stack([tri.real, tri.imag]), closed=True,
                             facecolor="#dde6f0", edgecolor="#33566f", linewidth=0.8))
        if labels:
            ax.annotate(str(u), (pd.z_face[u].real, pd.z_face[u].imag), fontsize=7,
                        xytext=(2, 2), textcoords="offset points")
    for dk in range(d.n_directed):
        u, _ = d.directed(dk)
        a, b = pd.z_face[u], pd.z_mid[dk]
        ax.plot([a.real, b.real], [a.imag, b.imag], color="#33566f", linewidth=0.6)
    for e in range(len(d.edges)):
        p = pd.middle_path(2 * e)
        ax.plot(p.real, p.imag, color="#b5472f", linewidth=0.8)
    ax.plot(pd.z_face.real, pd.z_face.imag, "o", color="#33566f", markersize=2.5)
    ax.plot(pd.z_mid.real, pd.z_mid.imag, ".", color="#b5472f", markersize=2.5)
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_axis_off()
    return ax


def save_svg(pd: PlanarDecomposition, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(8, 8))
    plot_decomposition(pd, ax)
    if title:
        ax.set_title(title, fontsize=10)
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
