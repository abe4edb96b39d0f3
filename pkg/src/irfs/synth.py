"""Bundled desk-scale datasets, generated deterministically.

Two datasets ship with the package:

* ``planted`` — 200 samples x 6 features where features 0 and 1 jointly
  determine the label through an AND rule with a margin band around the
  decision boundary, so any subset containing both reaches test accuracy 1.0
  while no other subset can. The remaining 4 features are uniform noise.
* ``spam`` — 4601 samples x 57 features mimicking word-frequency spam data
  (sparse, skewed, nonnegative): 12 informative columns with class-dependent
  occurrence rates and scales, 10 noisy copies of informative columns, and 35
  label-independent noise columns, shuffled into random positions.
"""

from __future__ import annotations

import csv

import numpy as np

from .dataio import Dataset, from_arrays

PLANTED_SEED = 7
SPAM_SEED = 11


def _margin_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform on [0, 0.45) U [0.55, 1.0): keeps a gap around the 0.5 boundary."""
    u = rng.uniform(0.0, 0.9, size=size)
    return np.where(u < 0.45, u, u + 0.1)


def planted_arrays(seed: int = PLANTED_SEED, n_samples: int = 200, n_noise: int = 4):
    rng = np.random.default_rng(seed)
    f0 = _margin_uniform(rng, n_samples)
    f1 = _margin_uniform(rng, n_samples)
    labels = ((f0 > 0.5) & (f1 > 0.5)).astype(np.int64)
    noise = rng.uniform(0.0, 1.0, size=(n_samples, n_noise))
    features = np.column_stack([f0, f1, noise])
    names = [f"f{j}" for j in range(features.shape[1])]
    return features, labels, names


def spam_like_arrays(seed: int = SPAM_SEED, n_samples: int = 4601):
    rng = np.random.default_rng(seed)
    labels = (rng.random(n_samples) < 0.394).astype(np.int64)

    n_informative, n_redundant, n_noise = 12, 10, 35
    columns = []
    informative = []
    for j in range(n_informative):
        # occurrence probability and intensity both shift with the class
        gap = 0.25 + 0.35 * rng.random()
        p0 = 0.08 + 0.30 * rng.random()
        p1 = min(0.95, p0 + gap)
        if j % 2 == 0:
            p0, p1 = p1, p0
        scale0 = 0.2 + 0.6 * rng.random()
        scale1 = scale0 * (1.5 + rng.random())
        present = rng.random(n_samples) < np.where(labels == 1, p1, p0)
        intensity = rng.exponential(np.where(labels == 1, scale1, scale0))
        col = np.where(present, intensity, 0.0)
        columns.append(col)
        informative.append(col)
    for j in range(n_redundant):
        src = informative[int(rng.integers(0, n_informative))]
        mix = 0.6 + 0.35 * rng.random()
        col = mix * src + (1.0 - mix) * rng.exponential(0.3, n_samples)
        columns.append(col)
    for j in range(n_noise):
        present = rng.random(n_samples) < (0.1 + 0.4 * rng.random())
        col = np.where(present, rng.exponential(0.4, n_samples), 0.0)
        columns.append(col)

    features = np.column_stack(columns)
    perm = rng.permutation(features.shape[1])
    features = features[:, perm]
    names = [f"wf{j:02d}" for j in range(features.shape[1])]
    return features, labels, names


_GENERATORS = {"planted": planted_arrays, "spam": spam_like_arrays}


def make_dataset(name: str, seed: int | None = None) -> Dataset:
    """Unsplit Dataset for one of the bundled generators."""
    if name not in _GENERATORS:
        raise ValueError(f"unknown dataset {name!r}; choose from {sorted(_GENERATORS)}")
    features, labels, names = _GENERATORS[name]() if seed is None else _GENERATORS[name](seed)
    return from_arrays(features, labels, names)


def write_csv(path, name: str, seed: int | None = None) -> int:
    """Write a bundled dataset as a CSV (label last, column 'label'); returns rows."""
    if name not in _GENERATORS:
        raise ValueError(f"unknown dataset {name!r}; choose from {sorted(_GENERATORS)}")
    features, labels, names = _GENERATORS[name]() if seed is None else _GENERATORS[name](seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["label"])
        for row, label in zip(features, labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
    return features.shape[0]
