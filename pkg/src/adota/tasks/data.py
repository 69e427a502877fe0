"""Datasets: a small container plus seeded synthetic generators and a CSV loader."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Samples as rows of ``features``.

    ``num_classes`` is set for classification (integer labels in
    ``range(num_classes)``) and ``None`` for regression.
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError(f"features must be a 2-D matrix, got shape {x.shape}")
        if self.num_classes is None:
            y = np.asarray(self.labels, dtype=np.float64)
        else:
            y = np.asarray(self.labels).astype(np.int64)
            if y.size and (y.min() < 0 or y.max() >= self.num_classes):
                raise ValueError("class labels out of range")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError("label count must match feature rows")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain non-finite values")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def is_classification(self) -> bool:
        return self.num_classes is not None

    def subset(self, indices) -> Dataset:
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.num_classes)


def gaussian_mixture(
    n_samples: int,
    n_features: int,
    n_classes: int,
    rng: np.random.Generator,
    class_sep: float = 1.0,
    noise: float = 1.0,
    n_test: int = 0,
) -> tuple[Dataset, Dataset | None]:
    """Balanced isotropic Gaussian clusters, one per class.

    Class centres are N(0, class_sep^2 I); samples add N(0, noise^2 I).
    Train and test sets share the centres.
    """
    centres = rng.normal(0.0, class_sep, size=(n_classes, n_features))

    def draw(m):
        y = np.arange(m) % n_classes
        rng.shuffle(y)
        x = centres[y] + rng.normal(0.0, noise, size=(m, n_features))
        return Dataset(x, y, n_classes)

    train = draw(n_samples)
    return train, (draw(n_test) if n_test else None)


def linear_regression(
    n_samples: int,
    n_features: int,
    rng: np.random.Generator,
    noise: float = 0.1,
    n_test: int = 0,
) -> tuple[Dataset, Dataset | None]:
    """y = x . w_true + noise with x ~ N(0, I)."""
    w_true = rng.normal(size=n_features)

    def draw(m):
        x = rng.normal(size=(m, n_features))
        return Dataset(x, x @ w_true + noise * rng.normal(size=m), None)

    train = draw(n_samples)
    return train, (draw(n_test) if n_test else None)


def load_csv(path: str | Path, classification: bool | None = None) -> Dataset:
    """Header row, one sample per row, label in the last column.

    Labels that are all integral are treated as class indices unless
    ``classification`` says otherwise.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        rows = [r for r in reader if r]
    if not rows:
        raise ValueError(f"{path}: no samples")
    table = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    if table.shape[1] != len(header):
        raise ValueError(f"{path}: rows do not match header width")
    x, y = table[:, :-1], table[:, -1]
    integral = bool(np.all(y == np.round(y)) and y.min() >= 0)
    if classification is None:
        classification = integral
    if classification:
        if not integral:
            raise ValueError(f"{path}: class labels must be non-negative integers")
        return Dataset(x, y.astype(np.int64), int(y.max()) + 1)
    return Dataset(x, y, None)


def train_test_split(ds: Dataset, test_fraction: float, rng: np.random.Generator):
    if not (0 <= test_fraction < 1):
        raise ValueError("test_fraction must lie in [0, 1)")
    perm = rng.permutation(len(ds))
    n_test = int(round(test_fraction * len(ds)))
    if n_test == 0:
        return ds, None
    return ds.subset(perm[n_test:]), ds.subset(perm[:n_test])
