"""Entrywise vector algebra shared by the channel, optimizer and bound code.

Vectors are plain 1-D float64 numpy arrays. Every function here is pure and
rejects non-finite input, because a NaN that slips into a simulation silently
poisons every later round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


class NonFiniteError(ValueError):
    """Raised when a vector operation sees or would produce NaN/Inf."""


def as_vector(v) -> np.ndarray:
    """Coerce to a finite 1-D float64 array (copying only if needed)."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("vector has non-finite coordinates")
    return arr


def _check_out(arr: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("operation produced non-finite coordinates")
    return arr


def signed_power(v, p: float) -> np.ndarray:
    """sign(v_i) * |v_i|**p, with sign(0) = 0."""
    v = as_vector(v)
    if not math.isfinite(p) or p < 0:
        raise ValueError(f"power must be finite and >= 0, got {p}")
    with np.errstate(over="ignore"):
        return _check_out(np.sign(v) * np.abs(v) ** p)


def abs_power(v, alpha: float) -> np.ndarray:
    """|v_i|**alpha entrywise."""
    v = as_vector(v)
    if not (0 < alpha <= 2):
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    with np.errstate(over="ignore"):
        return _check_out(np.abs(v) ** alpha)


def lp_norm(v, p: float) -> float:
    """L-p norm for p >= 1; ``p=math.inf`` gives the max-abs norm.

    The largest magnitude is factored out before exponentiation so large p
    does not overflow.
    """
    v = as_vector(v)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(v)
    m = float(a.max())
    if p == INF or m == 0.0:
        return m
    return m * float(np.sum((a / m) ** p)) ** (1.0 / p)


@dataclass(frozen=True)
class TailIndexPair:
    """A tail index and its Hölder conjugate: 1/alpha + 1/gamma = 1."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if not (1 < self.alpha <= 2):
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if abs(1 / self.alpha + 1 / self.gamma - 1) > 1e-12:
            raise ValueError("alpha and gamma are not conjugate")


def gamma_complement(alpha: float) -> TailIndexPair:
    if not (1 < alpha <= 2):
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    return TailIndexPair(alpha, alpha / (alpha - 1))
