"""Static SVG plot emitters for pipeline report bundles.

All figures render through the Agg backend with a pinned hash salt and
stripped date metadata so that re-running a pipeline under the same
config writes byte-identical files. Every plot has a CSV twin written by
the pipeline; nothing downstream should need to parse these SVGs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["line_plot", "bar_plot", "heatmap"]

matplotlib.rcParams["svg.hashsalt"] = "xaiq"

_FIGSIZE = (7.0, 4.5)
_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}, "bbox_inches": "tight"}


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def line_plot(
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    path: str | Path,
    *,
    title: str,
    xlabel: str,
    ylabel: str,
    ylim: tuple[float, float] | None = None,
) -> Path:
    """One labelled line per entry of ``series`` over a shared x axis."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for label, values in series.items():
        ax.plot(np.asarray(x, dtype=float), np.asarray(values, dtype=float),
                marker="o", markersize=3, linewidth=1.5, label=label)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if ylim is not None:
        ax.set_ylim(*ylim)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend()
    return _finish(fig, path)


def bar_plot(
    names: Sequence[str],
    values: Mapping[str, Sequence[float]] | Sequence[float],
    path: str | Path,
    *,
    title: str,
    xlabel: str,
) -> Path:
    """Horizontal bars, largest at the top.

    values may be a plain sequence (one bar per name) or a mapping of
    segment label to per-name values, drawn stacked; stacking is how the
    per-class contributions of a multiclass model are shown.
    """
    if not isinstance(values, Mapping):
        values = {"": np.asarray(values, dtype=float)}
    stacks = {label: np.asarray(vals, dtype=float) for label, vals in values.items()}
    totals = np.sum(list(stacks.values()), axis=0)
    order = np.argsort(totals, kind="stable")  # barh draws index 0 at the bottom

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    y = np.arange(len(names))
    left = np.zeros(len(names))
    for label, vals in stacks.items():
        ax.barh(y, vals[order], left=left, label=label or None)
        left += vals[order]
    ax.set_yticks(y)
    ax.set_yticklabels([names[i] for i in order])
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.grid(True, axis="x", alpha=0.3)
    if len(stacks) > 1:
        ax.legend()
    return _finish(fig, path)


def heatmap(
    matrix: np.ndarray,
    labels: Sequence[str],
    path: str | Path,
    *,
    title: str,
    vmin: float = 0.0,
    vmax: float = 1.0,
) -> Path:
    """Annotated square heatmap, used for association matrices."""
    values = np.asarray(matrix, dtype=float)
    if values.shape != (len(labels), len(labels)):
        raise ValueError(f"matrix shape {values.shape} does not fit {len(labels)} labels")

    fig, ax = plt.subplots(figsize=(0.7 * len(labels) + 2.5,) * 2)
    image = ax.imshow(values, vmin=vmin, vmax=vmax, cmap="viridis")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels)
    for i in range(len(labels)):
        for j in range(len(labels)):
            if np.isnan(values[i, j]):
                continue
            shade = "black" if values[i, j] > (vmin + vmax) / 2 else "white"
            ax.text(j, i, f"{values[i, j]:.2f}", ha="center", va="center",
                    color=shade, fontsize=7)
    ax.set_title(title)
    fig.colorbar(image, ax=ax, shrink=0.8)
    return _finish(fig, path)
