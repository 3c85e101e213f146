"""Matplotlib renderers for experiment artifacts.

Every report path that writes delimited data can also render a figure next
to it; the text files remain the canonical machine-readable output.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import SymmetricMatrix
from .stats import ConfidenceBand
from .stepfn import StepFunction

__all__ = [
    "save_step_functions",
    "save_confidence_band",
    "save_matrix_heatmap",
    "save_embedding",
    "save_pr_curves",
]

_CYCLE = ("#8c1515", "#00356b", "#eaab00", "#175e54", "#53284f")


def _step_xy(f: StepFunction):
    if f.is_empty:
        return [0.0, 1.0], [0.0, 0.0]
    xs = list(f.breakpoints)
    ys = list(f.values) + [0.0]
    return xs, ys


def save_step_functions(
    path,
    groups: Sequence[tuple[str, Sequence[StepFunction], StepFunction | None]],
    title: str = "",
    xlabel: str = "scale",
    ylabel: str = "count",
) -> None:
    """Overlay faint individual step functions with a bold mean per group."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for color, (label, fns, mean) in zip(_CYCLE, groups):
        for f in fns:
            xs, ys = _step_xy(f)
            ax.step(xs, ys, where="post", color=color, alpha=0.08, linewidth=0.8)
        if mean is not None:
            xs, ys = _step_xy(mean)
            ax.step(xs, ys, where="post", color=color, linewidth=2.0, label=label)
    if any(mean is not None for _, _, mean in groups):
        ax.legend(frameon=False)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_confidence_band(path, band: ConfidenceBand, center: StepFunction, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    xs, ys = _step_xy(center)
    ax.step(xs, ys, where="post", color="black", linewidth=1.6, label="mean")
    lx, ly = _step_xy(band.lower)
    ux, uy = _step_xy(band.upper)
    ax.step(lx, ly, where="post", color=_CYCLE[0], linewidth=1.0)
    ax.step(ux, uy, where="post", color=_CYCLE[0], linewidth=1.0)
    grid = sorted(set(band.lower.breakpoints) | set(band.upper.breakpoints))
    if len(grid) >= 2:
        dense = np.linspace(grid[0], grid[-1], 512)
        ax.fill_between(
            dense,
            band.lower.sample_values(dense),
            band.upper.sample_values(dense),
            step="post",
            color=_CYCLE[0],
            alpha=0.2,
            linewidth=0,
        )
    ax.set_xlabel("scale")
    ax.set_ylabel("count")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_matrix_heatmap(path, matrix: SymmetricMatrix, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(matrix.to_dense(), cmap="Spectral", interpolation="nearest")
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_xlabel("index")
    ax.set_ylabel("index")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_embedding(path, coords: np.ndarray, labels: Sequence[int] | None = None, title: str = "") -> None:
    coords = np.asarray(coords)
    xs = coords[:, 0]
    ys = coords[:, 1] if coords.shape[1] > 1 else np.zeros(len(coords))
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    if labels is None:
        ax.scatter(xs, ys, s=12, color=_CYCLE[0])
    else:
        labels = np.asarray(labels)
        for color, cls in zip(_CYCLE, sorted(set(labels.tolist()))):
            mask = labels == cls
            ax.scatter(xs[mask], ys[mask], s=12, color=color, label=str(cls))
        ax.legend(frameon=False, title="class")
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pr_curves(
    path, curves: Sequence[tuple[str, Sequence[tuple[float, float]], float]], title: str = ""
) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for color, (label, curve, auc) in zip(_CYCLE, curves):
        rs = [r for r, _ in curve]
        ps = [p for _, p in curve]
        ax.plot(rs, ps, color=color, linewidth=1.6, label=f"{label} (AUC {auc:.3f})")
    ax.axhline(0.5, linestyle="--", color="gray", linewidth=0.8)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.legend(frameon=False, loc="lower left")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
