"""Tail-index estimation from interference samples (Hill estimator)."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

ALPHA_MIN, ALPHA_MAX = 1.0, 2.0


class TailIndexEstimate(NamedTuple):
    alpha: float  # clamped into (1, 2]
    raw: float
    out_of_range: bool
    k: int


def hill_estimate(samples, k: int | None = None) -> TailIndexEstimate:
    """Hill estimate from the k largest |x|; k defaults to floor(sqrt(n)).

    The raw estimate is k / sum_{i<k} ln(X_(i) / X_(k)) with X_(0) the largest
    magnitude. It is clamped into (1, 2] for use as an optimizer exponent and
    flagged when clamping happened.
    """
    x = np.abs(np.asarray(samples, dtype=np.float64).ravel())
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    n = x.size
    if k is None:
        k = math.isqrt(n)
    k = int(k)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n < 2 * k:
        raise ValueError(f"need at least 2k = {2 * k} samples, got {n}")
    top = -np.partition(-x, k)[: k + 1]
    top = np.sort(top)[::-1]
    threshold = top[k]
    if threshold <= 0:
        raise ValueError("degenerate order statistics: threshold magnitude is zero")
    h = float(np.mean(np.log(top[:k] / threshold)))
    if h <= 0:
        raise ValueError("degenerate order statistics: the top magnitudes are all equal")
    raw = 1.0 / h
    clamped = min(max(raw, math.nextafter(ALPHA_MIN, math.inf)), ALPHA_MAX)
    return TailIndexEstimate(clamped, raw, clamped != raw, k)


def estimate_tail_index(samples, k: int | None = None) -> float:
    """Clamped Hill estimate; see ``hill_estimate`` for the details."""
    return hill_estimate(samples, k).alpha
