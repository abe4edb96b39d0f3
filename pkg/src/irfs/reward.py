"""Reward computation: a shared base of (accuracy - beta * correlation)
distributed to selecting agents by tree importance (prs1), by historical
selection-frequency ratio (prs2), or split equally (the trainer-free
baseline's scheme). Deselecting agents always receive exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataio import Dataset
from .staterep import correlation_matrix


@dataclass
class RewardLedger:
    """Cumulative per-agent selection counts plus the last step's base terms."""

    counts: np.ndarray
    beta: float = 0.1
    last_acc: float = 0.0
    last_corr: float = 0.0

    @classmethod
    def with_initial_selection(cls, n_agents: int, beta: float = 0.1) -> "RewardLedger":
        # the all-selected initialization counts as everyone's first selection
        return cls(counts=np.ones(n_agents, dtype=np.int64), beta=beta)

    def record(self, actions, acc: float, corr: float):
        actions = np.asarray(actions, dtype=np.int64)
        if actions.shape != self.counts.shape:
            raise ValueError("action length does not match ledger")
        self.counts += actions
        self.last_acc = acc
        self.last_corr = corr

    def weights(self) -> np.ndarray:
        """Selection-frequency ratios; uniform when nothing was ever selected."""
        total = int(self.counts.sum())
        if total == 0:
            return np.full(self.counts.shape[0], 1.0 / self.counts.shape[0])
        return self.counts / total


def feature_correlation(dataset: Dataset, selected, corr_matrix: np.ndarray | None = None) -> float:
    """Mean pairwise Pearson correlation over all ordered pairs of the subset.

    Includes self-pairs, each contributing 1, so a single feature scores 1
    and the value is the mean of the |F_s| x |F_s| correlation matrix.
    """
    nodes = sorted(int(i) for i in selected)
    if not nodes:
        raise ValueError("empty selection")
    if corr_matrix is None:
        corr_matrix = correlation_matrix(dataset)
    sub = corr_matrix[np.ix_(nodes, nodes)].copy()
    np.fill_diagonal(sub, 1.0)
    return float(sub.sum() / len(nodes) ** 2)


def _base(acc: float, corr: float, beta: float) -> float:
    return acc - beta * corr


def reward_prs1(acc, corr, importances, actions, beta) -> np.ndarray:
    """Tree-importance share of the base for each selecting agent.

    `importances` maps original feature ids (of the selected subset only) to
    the fitted tree's importances; unselected features implicitly score 0.
    """
    actions = np.asarray(actions, dtype=np.int64)
    for i in importances:
        if actions[i] != 1:
            raise ValueError(f"importance present for unselected feature {i}")
    base = _base(acc, corr, beta)
    out = np.zeros(actions.shape[0])
    for i, imp in importances.items():
        out[i] = imp * base
    return out


def reward_prs2(acc, corr, ledger: RewardLedger, actions, beta) -> np.ndarray:
    """Frequency-ratio share of the base; ledger must already include `actions`."""
    actions = np.asarray(actions, dtype=np.int64)
    if actions.shape != ledger.counts.shape:
        raise ValueError("action length does not match ledger")
    weights = ledger.weights()
    return np.where(actions == 1, weights * _base(acc, corr, beta), 0.0)


def reward_equal(acc, corr, actions, beta, full_share: bool = False) -> np.ndarray:
    """Equal division of the base among selectors (trainer-free baseline).

    With full_share every selector receives the whole base instead of a
    1/|F_s| slice (ablation variant).
    """
    actions = np.asarray(actions, dtype=np.int64)
    n_selected = int(actions.sum())
    if n_selected == 0:
        return np.zeros(actions.shape[0])
    base = _base(acc, corr, beta)
    share = base if full_share else base / n_selected
    return np.where(actions == 1, share, 0.0)
