"""External trainers that advise hesitant agents.

Participated features are those selected at the previous step. Among them,
assertive features are the ones the policies re-select this step; hesitant
features are the ones the policies would drop. Trainers only ever flip
hesitant deselections back to selections:

* the KBest trainer flips hesitant features ranking in the top
  k = ceil(m/2) + n of the participated set by label mutual information;
* the decision-tree trainer flips hesitant features whose importance in a
  tree fitted on the participated set strictly exceeds the median assertive
  importance;
* hybrid teaching runs one trainer for steps [0, T), the other for [T, 2T),
  and no trainer afterward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mlkit
from .dataio import Dataset


@dataclass
class AdviceContext:
    """Agent grouping for one step, plus trainer diagnostics filled on use."""

    participated: frozenset[int]
    assertive: frozenset[int]
    hesitant: frozenset[int]
    k: int = field(init=False)
    g: float | None = None
    assertive_importances: dict[int, float] | None = None
    hesitant_importances: dict[int, float] | None = None

    def __post_init__(self):
        # ceil(m/2 + n) with exact integer arithmetic
        self.k = (len(self.assertive) + 1) // 2 + len(self.hesitant)

    @property
    def m(self) -> int:
        return len(self.assertive)

    @property
    def n(self) -> int:
        return len(self.hesitant)


@dataclass(frozen=True)
class TrainerAdvice:
    flip_indices: frozenset[int] = frozenset()


NO_ADVICE = TrainerAdvice()


def identify_groups(prev_actions, initial_actions) -> AdviceContext:
    """Split agents into participated / assertive / hesitant groups."""
    prev = np.asarray(prev_actions, dtype=np.int64)
    initial = np.asarray(initial_actions, dtype=np.int64)
    if prev.shape != initial.shape or prev.ndim != 1:
        raise ValueError(f"action length mismatch: {prev.shape} vs {initial.shape}")
    participated = frozenset(int(i) for i in np.flatnonzero(prev == 1))
    assertive = frozenset(i for i in participated if initial[i] == 1)
    return AdviceContext(
        participated=participated,
        assertive=assertive,
        hesitant=participated - assertive,
    )


def kbest_advise(ctx: AdviceContext, dataset: Dataset, bins: int = 10) -> TrainerAdvice:
    """Flip hesitant features that make the top-k MI ranking of participated ones."""
    if not ctx.participated or not ctx.hesitant:
        return NO_ADVICE
    k = min(ctx.k, len(ctx.participated))
    top = mlkit.select_kbest(dataset, ctx.participated, k, bins=bins)
    return TrainerAdvice(flip_indices=frozenset(ctx.hesitant & top))


def tree_importances(dataset: Dataset, participated) -> dict[int, float]:
    """Importances of a tree fitted on the participated columns (train split).

    Memoized per subset on the dataset; the tree itself is not retained.
    """
    cols = tuple(sorted(int(i) for i in participated))
    cache = dataset._cache.setdefault("participated_importances", {})
    if cols not in cache:
        model = mlkit.fit_tree(dataset.train_x[:, cols], dataset.train_y)
        cache[cols] = {cols[j]: float(model.feature_importances[j]) for j in range(len(cols))}
    return cache[cols]


def importance_flips(importances, assertive, hesitant) -> tuple[frozenset[int], float]:
    """Hesitant indices whose importance strictly exceeds the assertive median."""
    g = float(np.median([importances[i] for i in sorted(assertive)]))
    return frozenset(i for i in hesitant if importances[i] > g), g


def dtree_advise(ctx: AdviceContext, dataset: Dataset) -> TrainerAdvice:
    """Flip hesitant features more important than half the assertive ones.

    With no assertive features there is no reference set, so no advice.
    """
    if not ctx.participated or not ctx.assertive or not ctx.hesitant:
        return NO_ADVICE
    importances = tree_importances(dataset, ctx.participated)
    flips, g = importance_flips(importances, ctx.assertive, ctx.hesitant)
    ctx.g = g
    ctx.assertive_importances = {i: importances[i] for i in sorted(ctx.assertive)}
    ctx.hesitant_importances = {i: importances[i] for i in sorted(ctx.hesitant)}
    return TrainerAdvice(flip_indices=flips)


def apply_advice(initial_actions, advice: TrainerAdvice) -> np.ndarray:
    """Execute advised flips; only deselect -> select is legal."""
    final = np.asarray(initial_actions, dtype=np.int64).copy()
    for i in advice.flip_indices:
        if not (0 <= i < final.shape[0]):
            raise ValueError(f"advised index {i} out of range")
        if final[i] != 0:
            raise ValueError(f"advised index {i} is not a hesitant deselection")
        final[i] = 1
    return final


def hybrid_schedule(t: int, transfer_point: int) -> str | None:
    """'trainer1' for steps [0, T), 'trainer2' for [T, 2T), None afterward."""
    if transfer_point < 1:
        raise ValueError(f"transfer point must be >= 1, got {transfer_point}")
    if t < transfer_point:
        return "trainer1"
    if t < 2 * transfer_point:
        return "trainer2"
    return None
