"""
Optional static renderings of the evaluation tables (PNG via matplotlib).

matplotlib is imported lazily; without it the CSV tables are the only output.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def _pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib is not installed; skipping plots (CSV tables are still written)")
        return None
    return plt


def plot_heatmap(path: Path, table: np.ndarray, title: str,
                 row_label: str = "view (model A)", col_label: str = "view (model B)") -> Optional[Path]:
    """Annotated heatmap of a view-by-view table; returns None when plotting is unavailable."""
    plt = _pyplot()
    if plt is None:
        return None
    rows, cols = table.shape
    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * cols, 1.0 + 0.6 * rows))
    image = ax.imshow(table, vmin=min(0.0, float(np.min(table))), vmax=1.0, cmap="viridis")
    for i in range(rows):
        for j in range(cols):
            ax.text(j, i, f"{table[i, j]:.2f}", ha="center", va="center", color="white", fontsize=7)
    ax.set_xticks(range(cols), [str(j + 1) for j in range(cols)])
    ax.set_yticks(range(rows), [str(i + 1) for i in range(rows)])
    ax.set_xlabel(col_label)
    ax.set_ylabel(row_label)
    ax.set_title(title)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bars(path: Path, labels: Sequence[str], values: Sequence[float], title: str,
              limits: Optional[Sequence[float]] = None) -> Optional[Path]:
    """Bar chart, optionally with a dashed permutation upper limit per bar."""
    plt = _pyplot()
    if plt is None:
        return None
    fig, ax = plt.subplots(figsize=(1.0 + 0.5 * len(values), 3.0))
    positions: List[int] = list(range(len(values)))
    ax.bar(positions, values, color="tab:blue")
    if limits is not None:
        for x, limit in zip(positions, limits):
            ax.hlines(limit, x - 0.4, x + 0.4, colors="tab:red", linestyles="dashed")
    ax.set_xticks(positions, list(labels))
    ax.set_ylim(min(0.0, float(np.min(values))) if len(values) else 0.0, 1.05)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
