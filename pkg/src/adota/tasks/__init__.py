"""Federated tasks: datasets, client partitions, local and global objectives."""

from __future__ import annotations

import numpy as np

from ..paramath import as_vector
from .data import Dataset, gaussian_mixture, linear_regression, load_csv, train_test_split
from .models import (
    LogisticModel,
    LossKind,
    LossModel,
    MLPModel,
    QuadraticModel,
    SoftmaxModel,
    UnboundedGradientError,
    make_model,
)
from .partition import (
    Partition,
    PartitionError,
    class_histograms,
    dirichlet_partition,
    iid_partition,
)

__all__ = [
    "Dataset", "Partition", "PartitionError", "LossKind", "LossModel", "QuadraticModel",
    "LogisticModel", "SoftmaxModel", "MLPModel", "UnboundedGradientError",
    "class_histograms", "dirichlet_partition", "iid_partition", "gaussian_mixture",
    "linear_regression", "load_csv", "make_model", "train_test_split",
    "local_gradient", "local_loss", "global_loss", "global_gradient", "grad_bound_C",
    "accuracy",
]


def _rows(dataset: Dataset, indices):
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("client has no samples")
    if idx.min() < 0 or idx.max() >= len(dataset):
        raise IndexError("sample index out of range")
    return dataset.features[idx], dataset.labels[idx]


def local_gradient(model: LossModel, w, dataset: Dataset, indices) -> np.ndarray:
    """Full-batch gradient of one client's empirical loss."""
    x, y = _rows(dataset, indices)
    return model.loss_and_grad(as_vector(w), x, y)[1]


def local_loss(model: LossModel, w, dataset: Dataset, indices) -> float:
    x, y = _rows(dataset, indices)
    return model.loss_and_grad(as_vector(w), x, y)[0]


def global_loss(model: LossModel, w, dataset: Dataset, partition: Partition) -> float:
    """Unweighted mean of client losses (every client counts 1/N)."""
    if partition.n_samples != len(dataset):
        raise ValueError("partition does not match dataset")
    return float(np.mean([local_loss(model, w, dataset, a) for a in partition.assignments]))


def global_gradient(model: LossModel, w, dataset: Dataset, partition: Partition) -> np.ndarray:
    grads = [local_gradient(model, w, dataset, a) for a in partition.assignments]
    return np.sum(grads, axis=0) / partition.n_clients


def grad_bound_C(model: LossModel, dataset: Dataset) -> float:
    """Upper bound on ||grad f_n(w)||_inf for any client subset of ``dataset``.

    Raises ``UnboundedGradientError`` when none exists; bound evaluation then
    needs a user-supplied constant.
    """
    return model.grad_bound(dataset)


def accuracy(model: LossModel, w, dataset: Dataset) -> float:
    return float(np.mean(model.predict(as_vector(w), dataset.features) == dataset.labels))
