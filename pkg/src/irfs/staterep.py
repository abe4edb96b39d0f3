"""State representation for a selected feature subset.

The subset becomes a complete feature-feature graph weighted by Pearson
correlation, augmented with directed parent->child edges harvested from the
fitted decision tree. A single convolution pass blends tree-neighbor
aggregation with full-graph aggregation, and the per-node vectors are pooled
into one fixed-length state (importance-weighted or plain mean).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from . import mlkit
from .config import DESCRIPTOR_DIM
from .dataio import Dataset
from .mlkit import DecisionTreeModel


@dataclass(eq=False, frozen=True)
class FeatureGraph:
    """Complete weighted graph over selected features plus directed tree edges.

    `weights` is aligned with `nodes` order, symmetric, with unit diagonal;
    `tree_edges` holds (parent, child) pairs in original feature ids.
    """

    nodes: tuple[int, ...]
    weights: np.ndarray
    tree_edges: frozenset[tuple[int, int]] = frozenset()

    def node_index(self, node: int) -> int:
        return self.nodes.index(node)


def feature_descriptor(column) -> np.ndarray:
    """Fixed 8-statistic summary of a normalized feature column.

    [mean, std, min, q25, median, q75, max, skewness]; skewness is 0 for a
    constant column. Population (1/n) moments throughout.
    """
    x = np.asarray(column, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty column")
    mean = float(x.mean())
    std = float(x.std())
    q25, median, q75 = (float(q) for q in np.quantile(x, [0.25, 0.5, 0.75]))
    if std > 0.0:
        skew = float(np.mean((x - mean) ** 3) / std**3)
    else:
        skew = 0.0
    return np.array([mean, std, float(x.min()), q25, median, q75, float(x.max()), skew])


def zero_state(dim: int = DESCRIPTOR_DIM) -> np.ndarray:
    """The state assigned to an empty selection."""
    return np.zeros(dim)


def correlation_matrix(dataset: Dataset) -> np.ndarray:
    """Full pairwise Pearson matrix over train-split columns, memoized.

    Diagonal is forced to exactly 1 (a degenerate column correlates 0 with
    everything else but still counts as its own perfect self-pair).
    """
    cached = dataset._cache.get("corr")
    if cached is not None:
        return cached
    x = dataset.train_x
    n = dataset.n_features
    corr = np.empty((n, n))
    for u in range(n):
        corr[u, u] = 1.0
        for v in range(u + 1, n):
            rho = mlkit.pearson(x[:, u], x[:, v])
            corr[u, v] = rho
            corr[v, u] = rho
    dataset._cache["corr"] = corr
    return corr


def build_graph(dataset: Dataset, selected, corr_matrix: np.ndarray | None = None) -> FeatureGraph:
    """Complete Pearson-weighted graph over the selected features (train split).

    Tree edges start empty; attach them with add_tree_edges. Pass the memoized
    full correlation matrix to avoid recomputing pairs on every step.
    """
    nodes = tuple(sorted(int(i) for i in selected))
    if not nodes:
        raise ValueError("empty selection")
    for i in nodes:
        if not (0 <= i < dataset.n_features):
            raise ValueError(f"selected index {i} out of range")
    if corr_matrix is not None:
        weights = corr_matrix[np.ix_(nodes, nodes)].copy()
    else:
        x = dataset.train_x
        k = len(nodes)
        weights = np.empty((k, k))
        for a in range(k):
            for b in range(a + 1, k):
                rho = mlkit.pearson(x[:, nodes[a]], x[:, nodes[b]])
                weights[a, b] = rho
                weights[b, a] = rho
    np.fill_diagonal(weights, 1.0)
    return FeatureGraph(nodes=nodes, weights=weights)


def add_tree_edges(graph: FeatureGraph, edges) -> FeatureGraph:
    """Attach directed (parent, child) edges; endpoints must be graph nodes."""
    node_set = set(graph.nodes)
    cleaned = set()
    for u, v in edges:
        if u == v:
            continue
        if u not in node_set or v not in node_set:
            raise ValueError(f"tree edge ({u}, {v}) has an endpoint outside the graph")
        cleaned.add((int(u), int(v)))
    return replace(graph, tree_edges=frozenset(cleaned))


def extract_tree_edges(model: DecisionTreeModel) -> frozenset[tuple[int, int]]:
    """Directed parent->child split-feature pairs, in the model's column ids.

    Only internal-node chains count; a parent and child splitting on the same
    feature yield no edge, and duplicates collapse.
    """
    edges = set()
    for node in range(model.n_nodes):
        parent_feat = int(model.feature[node])
        if parent_feat < 0:
            continue
        for child in (int(model.left[node]), int(model.right[node])):
            child_feat = int(model.feature[child])
            if child_feat >= 0 and child_feat != parent_feat:
                edges.add((parent_feat, child_feat))
    return frozenset(edges)


def gcn_update(
    graph: FeatureGraph, descriptors: Mapping[int, np.ndarray], lam: float
) -> dict[int, np.ndarray]:
    """One blended convolution pass over the augmented graph.

    For each node v:
        h'_v = lam * sum over tree in-neighbors u of W[u,v] * h_u
             + (1 - lam) * sum over all nodes w (v included) of W[w,v] * h_w
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    for v in graph.nodes:
        if v not in descriptors:
            raise ValueError(f"missing descriptor for node {v}")
    h = np.stack([np.asarray(descriptors[v], dtype=np.float64) for v in graph.nodes])
    k = len(graph.nodes)
    index = {v: i for i, v in enumerate(graph.nodes)}
    tree_adj = np.zeros((k, k))
    for u, v in graph.tree_edges:
        tree_adj[index[u], index[v]] = graph.weights[index[u], index[v]]
    updated = lam * (tree_adj.T @ h) + (1.0 - lam) * (graph.weights.T @ h)
    return {v: updated[i] for i, v in enumerate(graph.nodes)}


def state_method1(
    updated: Mapping[int, np.ndarray], importances: Mapping[int, float]
) -> np.ndarray:
    """Importance-weighted sum of updated node vectors.

    Falls back to the plain mean when every importance is zero (single-leaf
    tree), so the state never collapses to zero for a nonempty subset.
    """
    if set(updated) != set(importances):
        raise ValueError("node mismatch between updated vectors and importances")
    if not updated:
        raise ValueError("empty node map")
    if all(importances[v] == 0.0 for v in importances):
        return state_method2(updated)
    nodes = sorted(updated)
    out = np.zeros_like(np.asarray(updated[nodes[0]], dtype=np.float64))
    for v in nodes:
        out += importances[v] * np.asarray(updated[v], dtype=np.float64)
    return out


def state_method2(updated: Mapping[int, np.ndarray]) -> np.ndarray:
    """Mean of updated node vectors; order-invariant."""
    if not updated:
        raise ValueError("empty node map")
    nodes = sorted(updated)
    return np.mean([np.asarray(updated[v], dtype=np.float64) for v in nodes], axis=0)


def subset_state(
    dataset: Dataset,
    selected,
    model: DecisionTreeModel | None = None,
    lam: float = 0.5,
    method: int = 1,
    corr_matrix: np.ndarray | None = None,
    descriptor_matrix: np.ndarray | None = None,
    tree_edges_local=None,
    importances_local=None,
) -> np.ndarray:
    """Full pipeline from a selected subset + fitted tree to the state vector.

    `model` must be fitted on the columns of sorted(selected); its local
    feature ids are mapped back to original ids here. Instead of the model,
    previously extracted local tree edges and importances may be passed, as
    may precomputed full-matrix correlations/descriptors (train split).
    """
    nodes = sorted(int(i) for i in selected)
    graph = build_graph(dataset, nodes, corr_matrix)
    if tree_edges_local is None:
        if model is None:
            raise ValueError("need either a fitted model or tree_edges_local")
        tree_edges_local = extract_tree_edges(model)
    graph = add_tree_edges(graph, ((nodes[u], nodes[v]) for u, v in tree_edges_local))
    if descriptor_matrix is not None:
        descriptors = {v: descriptor_matrix[v] for v in nodes}
    else:
        descriptors = {v: feature_descriptor(dataset.train_x[:, v]) for v in nodes}
    updated = gcn_update(graph, descriptors, lam)
    if method == 2:
        return state_method2(updated)
    if method != 1:
        raise ValueError(f"state method must be 1 or 2, got {method}")
    if importances_local is None:
        if model is None:
            raise ValueError("need either a fitted model or importances_local")
        importances_local = model.feature_importances
    importances = {nodes[j]: float(importances_local[j]) for j in range(len(nodes))}
    return state_method1(updated, importances)
