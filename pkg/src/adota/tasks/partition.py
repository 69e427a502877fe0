"""Splitting a dataset across clients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

MAX_RETRIES = 100


@dataclass(frozen=True)
class Partition:
    """``assignments[n]`` holds the sample indices owned by client n."""

    assignments: tuple[np.ndarray, ...]
    n_samples: int

    def __post_init__(self):
        parts = tuple(np.sort(np.asarray(a, dtype=np.int64)) for a in self.assignments)
        object.__setattr__(self, "assignments", parts)
        if not parts:
            raise ValueError("partition needs at least one client")
        if any(p.size == 0 for p in parts):
            raise ValueError("every client needs at least one sample")
        flat = np.concatenate(parts)
        if flat.size != self.n_samples or not np.array_equal(
            np.sort(flat), np.arange(self.n_samples)
        ):
            raise ValueError("client index lists must be disjoint and cover the dataset")

    @property
    def n_clients(self) -> int:
        return len(self.assignments)

    def sizes(self) -> np.ndarray:
        return np.array([p.size for p in self.assignments])


class PartitionError(ValueError):
    pass


def _check(dataset: Dataset, n_clients: int):
    if len(dataset) == 0:
        raise PartitionError("cannot partition an empty dataset")
    if n_clients < 1:
        raise PartitionError("need at least one client")
    if n_clients > len(dataset):
        raise PartitionError(f"{n_clients} clients but only {len(dataset)} samples")


def iid_partition(dataset: Dataset, n_clients: int, rng: np.random.Generator) -> Partition:
    _check(dataset, n_clients)
    perm = rng.permutation(len(dataset))
    return Partition(tuple(np.array_split(perm, n_clients)), len(dataset))


def dirichlet_partition(
    dataset: Dataset, n_clients: int, concentration: float, rng: np.random.Generator
) -> Partition:
    """Per class, split its samples over clients by a Dirichlet(Dir, ..., Dir) draw.

    If some client ends up empty, all class proportions are redrawn; after
    ``MAX_RETRIES`` failed draws a ``PartitionError`` is raised.
    """
    _check(dataset, n_clients)
    if not dataset.is_classification:
        raise PartitionError("Dirichlet partitioning needs class labels")
    if not concentration > 0:
        raise PartitionError(f"concentration must be > 0, got {concentration}")
    if n_clients == 1:
        return Partition((np.arange(len(dataset)),), len(dataset))

    by_class = [np.flatnonzero(dataset.labels == k) for k in range(dataset.num_classes)]
    for _ in range(MAX_RETRIES):
        buckets: list[list[np.ndarray]] = [[] for _ in range(n_clients)]
        for idx in by_class:
            if idx.size == 0:
                continue
            idx = rng.permutation(idx)
            props = rng.dirichlet(np.full(n_clients, concentration))
            cuts = (np.cumsum(props)[:-1] * idx.size).astype(np.int64)
            for n, chunk in enumerate(np.split(idx, cuts)):
                buckets[n].append(chunk)
        parts = [np.concatenate(b) for b in buckets]
        if all(p.size > 0 for p in parts):
            return Partition(tuple(parts), len(dataset))
    raise PartitionError(
        f"could not give every one of {n_clients} clients a sample in {MAX_RETRIES} draws "
        f"(Dir={concentration}, {len(dataset)} samples)"
    )


def class_histograms(dataset: Dataset, partition: Partition) -> np.ndarray:
    """(n_clients, num_classes) matrix of per-client class proportions."""
    k = dataset.num_classes
    rows = [np.bincount(dataset.labels[a], minlength=k) / a.size for a in partition.assignments]
    return np.vstack(rows)
