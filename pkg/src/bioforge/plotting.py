"""Small matplotlib helpers for report figures (written to files, never shown)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def bar_chart(path, labels: list[str], values: list[float], title: str, ylabel: str,
              ylim: tuple[float, float] | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(values)), values, color="#4a7ab5")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    if ylim:
        ax.set_ylim(*ylim)
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.3g}", ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def histogram(path, series: dict[str, list[float]], title: str, xlabel: str,
              bins: int = 20) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, data in series.items():
        if len(data):
            ax.hist(data, bins=bins, alpha=0.6, label=label)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path
