"""Exploration loop orchestration, Best/Ave Acc metrics, classical baselines,
and report emission (delimited metrics, JSON summary, figure files).
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import advisor, agents, mlkit, staterep
from .advisor import NO_ADVICE, TrainerAdvice
from .config import ExplorationConfig
from .dataio import Dataset
from .reward import RewardLedger, feature_correlation, reward_equal, reward_prs1, reward_prs2


@dataclass
class StepRecord:
    """Everything observable about one exploration step."""

    step: int
    actions: np.ndarray
    n_selected: int
    acc: float
    rewards: np.ndarray
    advised_flips: int
    state_checksum: str
    corr: float
    selection_counts: np.ndarray

    @property
    def reward_sum(self) -> float:
        return float(self.rewards.sum())


@dataclass
class RunResult:
    records: list[StepRecord]
    agents: list[agents.AgentPolicy]
    ledger: RewardLedger
    config: ExplorationConfig

    @property
    def acc_series(self) -> list[float]:
        return [r.acc for r in self.records]


def _state_checksum(state: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(state).tobytes()).hexdigest()[:16]


def _active_trainer(config: ExplorationConfig, t: int) -> str | None:
    mode = config.trainer_mode
    if mode == "none":
        return None
    if mode in ("kbest", "dtree"):
        return mode
    phase = advisor.hybrid_schedule(t, config.resolved_transfer_point)
    if phase == "trainer1":
        return config.hybrid_order[0]
    if phase == "trainer2":
        return config.hybrid_order[1]
    return None


def evaluate_subset(dataset: Dataset, cols: tuple[int, ...]):
    """Fit the downstream tree on a column subset and cache what the loop needs.

    Returns (test accuracy, local tree edges, local importance vector). Pure
    per dataset+subset, so results are memoized.
    """
    cache = dataset._cache.setdefault("subset_eval", {})
    hit = cache.get(cols)
    if hit is None:
        model = mlkit.fit_tree(dataset.train_x[:, cols], dataset.train_y)
        acc = mlkit.accuracy(model, dataset.test_x[:, cols], dataset.test_y)
        hit = (acc, staterep.extract_tree_edges(model), model.feature_importances.copy())
        cache[cols] = hit
    return hit


def run_exploration(dataset: Dataset, config: ExplorationConfig) -> RunResult:
    """Run the full trainer-advised exploration loop; deterministic per seed.

    Per step: agents emit initial actions from the current state, the active
    trainer flips advised hesitant deselections, the final subset is evaluated
    by a fresh decision tree (empty subsets score 0 with a zero state), rewards
    are distributed, one transition per agent is stored, and every agent whose
    replay holds a full batch trains once.
    """
    config.validate()
    n = dataset.n_features
    if n == 0:
        raise ValueError("dataset has no features")
    dataset._require_split()

    corr_matrix = staterep.correlation_matrix(dataset)
    descriptor_matrix = np.stack(
        [staterep.feature_descriptor(dataset.train_x[:, j]) for j in range(n)]
    )
    policies = agents.init_agents(n, config)
    ledger = RewardLedger.with_initial_selection(n, beta=config.beta)

    def subset_state_of(cols: tuple[int, ...], edges, importances) -> np.ndarray:
        return staterep.subset_state(
            dataset,
            cols,
            lam=config.lam,
            method=config.state_method,
            corr_matrix=corr_matrix,
            descriptor_matrix=descriptor_matrix,
            tree_edges_local=edges,
            importances_local=importances,
        )

    # all features start selected; the initial state describes that full subset
    prev = np.ones(n, dtype=np.int64)
    all_cols = tuple(range(n))
    _, edges0, imps0 = evaluate_subset(dataset, all_cols)
    state = subset_state_of(all_cols, edges0, imps0)

    records: list[StepRecord] = []
    for t in range(config.steps):
        initial = np.array(
            [agents.act(policies[i], state, config.exploit_prob) for i in range(n)],
            dtype=np.int64,
        )
        ctx = advisor.identify_groups(prev, initial)
        trainer = _active_trainer(config, t)
        if trainer == "kbest":
            advice = advisor.kbest_advise(ctx, dataset, bins=config.mi_bins)
        elif trainer == "dtree":
            advice = advisor.dtree_advise(ctx, dataset)
        else:
            advice = NO_ADVICE
        final = advisor.apply_advice(initial, advice)

        selected = np.flatnonzero(final == 1)
        if selected.size == 0:
            acc, corr = 0.0, 0.0
            next_state = staterep.zero_state(config.descriptor_dim)
            importance_map: dict[int, float] = {}
        else:
            cols = tuple(int(i) for i in selected)
            acc, edges, imps = evaluate_subset(dataset, cols)
            corr = feature_correlation(dataset, cols, corr_matrix)
            next_state = subset_state_of(cols, edges, imps)
            importance_map = {cols[j]: float(imps[j]) for j in range(len(cols))}

        ledger.record(final, acc, corr)
        if config.reward_scheme == "prs1":
            rewards = reward_prs1(acc, corr, importance_map, final, config.beta)
        elif config.reward_scheme == "prs2":
            rewards = reward_prs2(acc, corr, ledger, final, config.beta)
        else:
            rewards = reward_equal(acc, corr, final, config.beta, config.equal_full_share)

        for i in range(n):
            agents.store(
                policies[i],
                agents.Transition(state, int(final[i]), float(rewards[i]), next_state),
            )
            if len(policies[i].replay) >= config.batch_size:
                batch = agents.sample_batch(policies[i], config.batch_size)
                agents.train_step(policies[i], batch, config.gamma, config.lr)

        records.append(
            StepRecord(
                step=t,
                actions=final.copy(),
                n_selected=int(selected.size),
                acc=float(acc),
                rewards=np.asarray(rewards, dtype=np.float64),
                advised_flips=len(advice.flip_indices),
                state_checksum=_state_checksum(next_state),
                corr=float(corr),
                selection_counts=ledger.counts.copy(),
            )
        )
        prev = final
        state = next_state

    return RunResult(records=records, agents=policies, ledger=ledger, config=config)


# --- metrics ----------------------------------------------------------------


def best_acc(series, start: int, window: int) -> float:
    """Maximum of series[start : start + window]."""
    series = list(series)
    if window < 1 or start < 0 or start + window > len(series):
        raise ValueError(f"window [{start}, {start + window}) outside series of {len(series)}")
    return max(series[start : start + window])


def ave_acc(series, start: int, window: int) -> float:
    """Arithmetic mean of series[start : start + window]."""
    series = list(series)
    if window < 1 or start < 0 or start + window > len(series):
        raise ValueError(f"window [{start}, {start + window}) outside series of {len(series)}")
    return float(np.mean(series[start : start + window]))


# --- classical baselines ------------------------------------------------------


def _evaluate_selection(dataset: Dataset, selection) -> float:
    cols = tuple(sorted(int(i) for i in selection))
    acc, _, _ = evaluate_subset(dataset, cols)
    return acc


def baseline_kbest(dataset: Dataset, k: int | None = None, bins: int = 10):
    """Top-k features by label MI, evaluated by the downstream tree."""
    if k is None:
        k = dataset.n_features // 2
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    selection = mlkit.select_kbest(dataset, range(dataset.n_features), k, bins=bins)
    return selection, _evaluate_selection(dataset, selection)


def least_important(importances: np.ndarray) -> int:
    """Index with minimum importance; ties go to the higher index (dropped first)."""
    lowest = np.min(importances)
    return int(np.max(np.flatnonzero(importances == lowest)))


def baseline_dt_rfe(dataset: Dataset, k: int | None = None):
    """Recursive elimination: refit the tree, drop the least important feature."""
    n = dataset.n_features
    if k is None:
        k = n // 2
    if not (1 <= k <= n):
        raise ValueError(f"k must be in [1, {n}], got {k}")
    remaining = list(range(n))
    while len(remaining) > k:
        model = mlkit.fit_tree(dataset.train_x[:, remaining], dataset.train_y)
        remaining.pop(least_important(model.feature_importances))
    selection = set(remaining)
    return selection, _evaluate_selection(dataset, selection)


def baseline_mrmr(dataset: Dataset, k: int | None = None, bins: int = 10):
    """Greedy max-relevance/min-redundancy selection, evaluated by the tree."""
    n = dataset.n_features
    if k is None:
        k = n // 2
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = min(k, n)
    relevance = mlkit._train_mi_scores(dataset, range(n), bins)
    chosen: list[int] = []
    candidates = set(range(n))
    while len(chosen) < k:
        best_score, best_idx = None, None
        for f in sorted(candidates):
            if chosen:
                redundancy = sum(
                    mlkit.feature_mutual_information(dataset, f, s, bins) for s in chosen
                ) / len(chosen)
            else:
                redundancy = 0.0
            score = relevance[f] - redundancy
            if best_score is None or score > best_score:
                best_score, best_idx = score, f
        chosen.append(best_idx)
        candidates.remove(best_idx)
    selection = set(chosen)
    return selection, _evaluate_selection(dataset, selection)


BASELINES = {"kbest": baseline_kbest, "dtrfe": baseline_dt_rfe, "mrmr": baseline_mrmr}


def run_baseline(dataset: Dataset, method: str, k: int | None = None):
    if method not in BASELINES:
        raise ValueError(f"unknown baseline {method!r}; choose from {sorted(BASELINES)}")
    return BASELINES[method](dataset, k)


# --- reporting ----------------------------------------------------------------

METRICS_HEADER = ["step", "acc", "n_selected", "reward_sum", "advised_flips"]
WINDOW = 100


def write_metrics_csv(records: list[StepRecord], path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for r in records:
            writer.writerow(
                [r.step, repr(r.acc), r.n_selected, repr(r.reward_sum), r.advised_flips]
            )


def read_metrics_csv(path) -> dict[str, list]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {
        "step": [int(r["step"]) for r in rows],
        "acc": [float(r["acc"]) for r in rows],
        "n_selected": [int(r["n_selected"]) for r in rows],
        "reward_sum": [float(r["reward_sum"]) for r in rows],
        "advised_flips": [int(r["advised_flips"]) for r in rows],
    }


def summarize(accs: list[float], flips: list[int], baselines: dict | None = None) -> dict:
    """Overall and per-100-step-window Best/Ave Acc plus a flip histogram."""
    steps = len(accs)
    windows = []
    for start in range(0, steps, WINDOW):
        size = min(WINDOW, steps - start)
        windows.append(
            {
                "start": start,
                "size": size,
                "best_acc": best_acc(accs, start, size),
                "ave_acc": ave_acc(accs, start, size),
            }
        )
    histogram: dict[str, int] = {}
    for f in flips:
        histogram[str(f)] = histogram.get(str(f), 0) + 1
    return {
        "steps": steps,
        "best_acc": best_acc(accs, 0, steps),
        "ave_acc": ave_acc(accs, 0, steps),
        "windows": windows,
        "advised_flip_histogram": histogram,
        "baselines": baselines or {},
    }


def report(
    records: list[StepRecord],
    out_dir,
    baselines: dict | None = None,
    plot: bool = False,
    config: ExplorationConfig | None = None,
) -> dict[str, Path]:
    """Write metrics.csv + summary.json (+ SVG figures when plot=True)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"metrics": out_dir / "metrics.csv", "summary": out_dir / "summary.json"}
    write_metrics_csv(records, paths["metrics"])

    accs = [r.acc for r in records]
    flips = [r.advised_flips for r in records]
    summary = summarize(accs, flips, baselines)
    if config is not None:
        summary["config"] = asdict(config)
    paths["summary"].write_text(json.dumps(summary, indent=2, sort_keys=True))

    if plot:
        from . import plotting

        paths["accuracy_plot"] = out_dir / "accuracy_vs_step.svg"
        plotting.save_accuracy_curve(list(range(len(accs))), accs, paths["accuracy_plot"])
        paths["flips_plot"] = out_dir / "advised_flips.svg"
        plotting.save_flip_histogram(flips, paths["flips_plot"])
    return paths
