"""CSV ingestion, validation, and the fixed train/test split.

Every downstream evaluation (trees, trainers, rewards) runs against the
split produced here, so the Dataset is treated as immutable once built.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np


class DataError(ValueError):
    """Raised for unreadable, malformed, or degenerate input data."""


@dataclass(eq=False)
class Dataset:
    """Numeric feature matrix with integer labels and a fixed row split.

    Features are min-max normalized to [0, 1] per column at load time
    (bounds over the full dataset); constant columns map to 0.0.
    Immutable after construction; safe to share read-only across threads.
    """

    features: np.ndarray          # (n_samples, n_features) float64 in [0, 1]
    labels: np.ndarray            # (n_samples,) int64, contiguous from 0
    feature_names: list[str]
    train_indices: np.ndarray | None = None
    test_indices: np.ndarray | None = None
    n_dropped: int = 0
    # memo space for pure per-dataset quantities (MI scores, importances);
    # single-writer appends only, values are deterministic
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def _require_split(self):
        if self.train_indices is None or self.test_indices is None:
            raise DataError("dataset has no train/test split; call split() first")

    @property
    def train_x(self) -> np.ndarray:
        self._require_split()
        return self.features[self.train_indices]

    @property
    def train_y(self) -> np.ndarray:
        self._require_split()
        return self.labels[self.train_indices]

    @property
    def test_x(self) -> np.ndarray:
        self._require_split()
        return self.features[self.test_indices]

    @property
    def test_y(self) -> np.ndarray:
        self._require_split()
        return self.labels[self.test_indices]


def _parse_cell(token: str) -> float | None:
    """Parse one feature cell; None means missing (empty or NaN)."""
    token = token.strip()
    if not token:
        return None
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"non-numeric feature cell: {token!r}") from None
    if math.isnan(value):
        return None
    return value


def from_arrays(features, labels, feature_names=None, n_dropped: int = 0) -> Dataset:
    """Build an unsplit Dataset from in-memory arrays (normalizes like load_csv)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0 or features.shape[1] == 0:
        raise DataError("features must be a non-empty 2-D matrix")
    labels = _encode_labels(list(np.asarray(labels).tolist()))
    if labels.shape[0] != features.shape[0]:
        raise DataError("labels length does not match feature rows")
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(features.shape[1])]
    return Dataset(
        features=_minmax_normalize(features),
        labels=labels,
        feature_names=list(feature_names),
        n_dropped=n_dropped,
    )


def _encode_labels(raw: list) -> np.ndarray:
    """Re-encode arbitrary label values to 0..C-1 by first appearance."""
    mapping: dict = {}
    encoded = np.empty(len(raw), dtype=np.int64)
    for i, value in enumerate(raw):
        if value not in mapping:
            mapping[value] = len(mapping)
        encoded[i] = mapping[value]
    if len(mapping) < 2:
        raise DataError("fewer than 2 distinct label values")
    return encoded


def _minmax_normalize(features: np.ndarray) -> np.ndarray:
    lo = features.min(axis=0)
    hi = features.max(axis=0)
    width = hi - lo
    out = np.zeros_like(features)
    nonconst = width > 0
    out[:, nonconst] = (features[:, nonconst] - lo[nonconst]) / width[nonconst]
    return out


def load_csv(path, label_column) -> Dataset:
    """Load an RFC-4180-style CSV with header into an unsplit Dataset.

    `label_column` is a header name or a 0-based column index. Rows with
    any missing cell (empty or NaN, in features or label) are dropped and
    counted in Dataset.n_dropped; a non-numeric feature token is an error.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file")

    header = [h.strip() for h in rows[0]]
    if isinstance(label_column, int) or (
        isinstance(label_column, str) and label_column not in header and label_column.lstrip("-").isdigit()
    ):
        label_idx = int(label_column)
        if not (-len(header) <= label_idx < len(header)):
            raise DataError(f"label column index {label_idx} out of range")
        label_idx %= len(header)
    else:
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)

    feature_names = [h for i, h in enumerate(header) if i != label_idx]
    matrix: list[list[float]] = []
    raw_labels: list[str] = []
    dropped = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        label_token = row[label_idx].strip()
        values = []
        missing = not label_token
        for i, cell in enumerate(row):
            if i == label_idx:
                continue
            parsed = _parse_cell(cell)
            if parsed is None:
                missing = True
                break
            values.append(parsed)
        if missing:
            dropped += 1
            continue
        matrix.append(values)
        raw_labels.append(label_token)

    if not matrix:
        raise DataError(f"{path}: all rows dropped")
    return from_arrays(np.array(matrix), raw_labels, feature_names, n_dropped=dropped)


def split(dataset: Dataset, ratio: float = 0.8, seed: int = 0) -> Dataset:
    """Return a copy of `dataset` with a deterministic train/test split.

    Same seed always yields identical index sets; |train| = round(ratio * n).
    """
    if not (0.0 < ratio < 1.0):
        raise DataError(f"split ratio must be in (0, 1), got {ratio}")
    n = dataset.n_samples
    n_train = int(round(ratio * n))
    n_test = n - n_train
    if n_train < 2 or n_test < 2:
        raise DataError(f"split sizes too small: {n_train} train / {n_test} test")
    perm = np.random.default_rng(seed).permutation(n)
    return replace(
        dataset,
        train_indices=np.sort(perm[:n_train]),
        test_indices=np.sort(perm[n_train:]),
        _cache={},
    )
