"""From-scratch ML kernels: Pearson correlation, binned mutual information,
KBest scoring, CART decision tree with Gini importances, and accuracy.

The tree is the downstream task for every subset evaluation and also the
decision-tree trainer's scorer, so its split search is numba-compiled.
Tie-breaking is pinned everywhere (lowest feature index, then lowest
threshold; leaf ties to the lower class id) so results are reproducible
across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dataio import Dataset


def pearson(x, y) -> float:
    """Pearson correlation with population (1/n) moments.

    Returns 0.0 when either column is constant.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 values")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.mean(xc * xc))
    sy = np.sqrt(np.mean(yc * yc))
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(np.mean(xc * yc) / (sx * sy))


def _bin_column(x: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width bin ids over x's range; the max value lands in the last bin."""
    lo = x.min()
    hi = x.max()
    if hi == lo:
        return np.zeros(x.size, dtype=np.int64)
    ids = ((x - lo) / (hi - lo) * bins).astype(np.int64)
    return np.minimum(ids, bins - 1)


def mutual_information(x, y, bins: int = 10) -> float:
    """Plug-in mutual information (natural log) between binned x and labels y.

    Returns 0.0 when either marginal is degenerate (constant x or single class).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    if x.size == 0:
        return 0.0
    if x.min() == x.max():
        return 0.0
    xb = _bin_column(x, bins)
    _, yb = np.unique(y, return_inverse=True)
    n_y = int(yb.max()) + 1
    joint = np.zeros((bins, n_y), dtype=np.float64)
    np.add.at(joint, (xb, yb), 1.0)
    joint /= x.size
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / (px * py)[nz])))
    return max(mi, 0.0)


def _train_mi_scores(dataset: Dataset, indices, bins: int) -> dict[int, float]:
    """Per-feature MI with the label on the train split, memoized on the dataset."""
    cache = dataset._cache.setdefault(("mi", bins), {})
    missing = [i for i in indices if i not in cache]
    if missing:
        train_x = dataset.train_x
        train_y = dataset.train_y
        for i in missing:
            cache[i] = mutual_information(train_x[:, i], train_y, bins)
    return cache


def feature_mutual_information(dataset: Dataset, u: int, v: int, bins: int = 10) -> float:
    """MI between two feature columns (train split), both equal-width binned."""
    key = (min(u, v), max(u, v))
    cache = dataset._cache.setdefault(("ffmi", bins), {})
    if key not in cache:
        a = dataset.train_x[:, key[0]]
        b = dataset.train_x[:, key[1]]
        cache[key] = mutual_information(a, _bin_column(b, bins), bins)
    return cache[key]


def select_kbest(dataset: Dataset, candidate_features, k: int, bins: int = 10) -> set[int]:
    """Top-k candidates by train-split MI with the label; ties to lower index."""
    candidates = sorted(int(i) for i in candidate_features)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    for i in candidates:
        if not (0 <= i < dataset.n_features):
            raise ValueError(f"candidate index {i} out of range")
    if not candidates or k == 0:
        return set()
    scores = _train_mi_scores(dataset, candidates, bins)
    ranked = sorted(candidates, key=lambda i: (-scores[i], i))
    return set(ranked[: min(k, len(candidates))])


# --- CART ------------------------------------------------------------------
#
# Node layout matches the exhaustive-split reference used in tests: preorder
# ids (left subtree fully before right), split only on strictly positive Gini
# decrease, thresholds at midpoints of consecutive distinct sorted values,
# rows with value <= threshold go left.


@njit(cache=True)
def _grow(X, y, n_classes, max_depth):  # pragma: no cover - exercised via fit_tree
    n, n_feat = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.full(cap, np.nan, np.float64)
    impurity = np.zeros(cap, np.float64)
    n_node = np.zeros(cap, np.int64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    counts = np.zeros((cap, n_classes), np.int64)
    raw_importance = np.zeros(n_feat, np.float64)

    order = np.arange(n)
    tmp = np.empty(n, np.int64)

    # stack of pending segments; right child pushed first so pops are preorder
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    st_parent = np.empty(cap, np.int64)
    st_isleft = np.empty(cap, np.int64)
    sp = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    st_parent[0] = -1
    st_isleft[0] = 0
    sp = 1
    n_nodes = 0

    while sp > 0:
        sp -= 1
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]
        parent = st_parent[sp]
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if st_isleft[sp] == 1:
                left[parent] = node
            else:
                right[parent] = node

        m = end - start
        cnt = counts[node]
        for i in range(start, end):
            cnt[y[order[i]]] += 1
        s = 0.0
        for c in range(n_classes):
            p = cnt[c] / m
            s += p * p
        gini = 1.0 - s
        impurity[node] = gini
        n_node[node] = m

        pure = False
        for c in range(n_classes):
            if cnt[c] == m:
                pure = True
        if pure or m < 2 or (max_depth >= 0 and depth >= max_depth):
            continue

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        vals = np.empty(m, np.float64)
        cum = np.empty(n_classes, np.int64)
        for f in range(n_feat):
            for i in range(m):
                vals[i] = X[order[start + i], f]
            sidx = np.argsort(vals)
            for c in range(n_classes):
                cum[c] = 0
            for i in range(m - 1):
                cum[y[order[start + sidx[i]]]] += 1
                lo_v = vals[sidx[i]]
                hi_v = vals[sidx[i + 1]]
                if lo_v == hi_v:
                    continue
                nl = i + 1
                nr = m - nl
                sl = 0.0
                sr = 0.0
                for c in range(n_classes):
                    pl = cum[c] / nl
                    sl += pl * pl
                    pr = (cnt[c] - cum[c]) / nr
                    sr += pr * pr
                gl = 1.0 - sl
                gr = 1.0 - sr
                gain = gini - (nl / m) * gl - (nr / m) * gr
                if gain > best_gain:
                    best_gain = gain
                    best_feat = f
                    best_thr = (lo_v + hi_v) / 2.0

        if best_feat < 0:
            continue

        feature[node] = best_feat
        threshold[node] = best_thr
        raw_importance[best_feat] += (m / n) * best_gain

        pos = 0
        for i in range(start, end):
            o = order[i]
            if X[o, best_feat] <= best_thr:
                tmp[pos] = o
                pos += 1
        nl = pos
        for i in range(start, end):
            o = order[i]
            if X[o, best_feat] > best_thr:
                tmp[pos] = o
                pos += 1
        for i in range(m):
            order[start + i] = tmp[i]

        st_start[sp] = start + nl
        st_end[sp] = end
        st_depth[sp] = depth + 1
        st_parent[sp] = node
        st_isleft[sp] = 0
        sp += 1
        st_start[sp] = start
        st_end[sp] = start + nl
        st_depth[sp] = depth + 1
        st_parent[sp] = node
        st_isleft[sp] = 1
        sp += 1

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        impurity[:n_nodes],
        n_node[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        counts[:n_nodes],
        raw_importance,
    )


@njit(cache=True)
def _traverse(X, feature, threshold, left, right, leaf_class):  # pragma: no cover
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]
    return out


@dataclass(eq=False)
class DecisionTreeModel:
    """Fitted CART tree over a feature-subset matrix.

    Node arrays are aligned by preorder node id; `feature[i] == -1` marks a
    leaf. `feature_importances` sums to 1 when the tree has at least one
    split and is all-zero for a single-leaf tree.
    """

    feature: np.ndarray
    threshold: np.ndarray
    gini: np.ndarray
    n_node_samples: np.ndarray
    left: np.ndarray
    right: np.ndarray
    class_counts: np.ndarray
    feature_importances: np.ndarray
    n_features: int
    n_classes: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def leaf_class(self) -> np.ndarray:
        # majority class per node; np.argmax takes the first (lowest id) on ties
        return np.argmax(self.class_counts, axis=1)

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"column-count mismatch: model has {self.n_features}, got {X.shape}"
            )
        return _traverse(X, self.feature, self.threshold, self.left, self.right, self.leaf_class)


def fit_tree(features, labels, max_depth: int | None = None) -> DecisionTreeModel:
    """Grow a greedy CART classifier (Gini criterion, unlimited depth by default)."""
    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("empty feature set")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if y.shape[0] != X.shape[0]:
        raise ValueError("labels length does not match feature rows")
    if max_depth is not None and max_depth < 0:
        raise ValueError(f"max_depth must be >= 0, got {max_depth}")
    n_classes = int(y.max()) + 1
    feat, thr, gini, n_node, left, right, counts, raw_imp = _grow(
        X, y, n_classes, -1 if max_depth is None else max_depth
    )
    total = raw_imp.sum()
    importances = raw_imp / total if total > 0 else raw_imp
    return DecisionTreeModel(
        feature=feat,
        threshold=thr,
        gini=gini,
        n_node_samples=n_node,
        left=left,
        right=right,
        class_counts=counts,
        feature_importances=importances,
        n_features=X.shape[1],
        n_classes=n_classes,
    )


def accuracy(model: DecisionTreeModel, features, labels) -> float:
    """Fraction of rows whose predicted leaf-majority class equals the label."""
    y = np.asarray(labels, dtype=np.int64)
    pred = model.predict(features)
    if pred.shape != y.shape:
        raise ValueError("labels length does not match feature rows")
    return float(np.mean(pred == y))
