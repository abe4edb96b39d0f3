"""Report figures, rendered headlessly to files next to the delimited output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_accuracy_curve(steps, accs, path, title: str = "Exploration accuracy"):
    """Per-step accuracy with the running best overlaid."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(steps, accs, lw=0.8, color="tab:blue", alpha=0.7, label="per-step accuracy")
    ax.plot(steps, np.maximum.accumulate(accs), lw=1.6, color="tab:red", label="best so far")
    ax.set_xlabel("step")
    ax.set_ylabel("test accuracy")
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_flip_histogram(flips, path, title: str = "Advised action flips per step"):
    """Histogram of how many hesitant agents took advice each step."""
    flips = np.asarray(flips, dtype=np.int64)
    values, counts = np.unique(flips, return_counts=True)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.bar(values, counts, color="tab:purple", width=0.8)
    ax.set_xlabel("agents flipped in a step")
    ax.set_ylabel("steps")
    ax.set_title(title)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
