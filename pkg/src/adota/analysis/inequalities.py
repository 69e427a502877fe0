"""Both sides of the auxiliary inequalities behind the convergence proofs.

Each function returns ``(lhs, rhs)`` so property tests can check
``lhs <= rhs`` on arbitrary inputs.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..paramath import as_vector, gamma_complement, lp_norm, signed_power


def _nonneg(seq) -> np.ndarray:
    a = np.asarray(seq, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError("sequence must be non-empty")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError("sequence entries must be finite and non-negative")
    return a


def cumulative_ratio_sides(seq, epsilon: float) -> tuple[float, float]:
    """sum_j a_j / (b_j + eps)  vs  ln(1 + b_n / eps), b_j = a_0 + ... + a_j."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    a = _nonneg(seq)
    b = np.cumsum(a)
    return float(np.sum(a / (b + epsilon))), math.log1p(b[-1] / epsilon)


def ema_ratio_sides(seq, phi: float, epsilon: float, squared: bool = False) -> tuple[float, float]:
    """sum_j a_j / (b_j + eps)  vs  ln(1 + b_n/eps)/(1-phi) - n ln(phi)/(1-phi).

    b_j = (1 - phi) sum_{i<=j} phi^(j-i) a_i, computed by its EMA recursion;
    n is the last index (sequence length minus one).

    The telescoping argument only controls the first power of a_j, which is
    also the form the Adam analysis consumes (a = |g|^alpha against v).
    ``squared=True`` puts a_j^2 on the left instead; that variant is false in
    general (a single a_0 = 10 with phi = 0.9, eps = 1 already breaks it) and
    is kept only so the counterexample stays reproducible.
    """
    if not 0 < phi < 1:
        raise ValueError(f"phi must lie in the open interval (0, 1), got {phi}")
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    a = _nonneg(seq)
    b = np.empty_like(a)
    acc = 0.0
    for j, aj in enumerate(a):
        acc = phi * acc + (1 - phi) * aj
        b[j] = acc
    n = a.size - 1
    num = a**2 if squared else a
    lhs = float(np.sum(num / (b + epsilon)))
    rhs = math.log1p(b[-1] / epsilon) / (1 - phi) - n * math.log(phi) / (1 - phi)
    return lhs, rhs


def alpha_norm_expansion_sides(u, v, alpha: float) -> tuple[float, float]:
    """||u+v||_a^a  vs  ||u||_a^a + a <u^<a-1>, v> + 4 ||v||_a^a, for a in [1, 2]."""
    if not 1 <= alpha <= 2:
        raise ValueError(f"alpha must lie in [1, 2], got {alpha}")
    u, v = as_vector(u), as_vector(v)
    lhs = float(np.sum(np.abs(u + v) ** alpha))
    rhs = (
        float(np.sum(np.abs(u) ** alpha))
        + alpha * float(signed_power(u, alpha - 1) @ v)
        + 4 * float(np.sum(np.abs(v) ** alpha))
    )
    return lhs, rhs


def smoothness_sides(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    L: float,
    u,
    v,
    alpha: float,
) -> tuple[float, float]:
    """f(u)  vs  f(v) + <grad f(v), u-v> + (L/2)(||u-v||_a^a / a + ||u-v||_g^g / g)."""
    u, v = as_vector(u), as_vector(v)
    gam = gamma_complement(alpha).gamma
    diff = u - v
    if not np.any(diff):
        return float(f(u)), float(f(v))
    rhs = (
        f(v)
        + float(grad(v) @ diff)
        + L / 2 * (lp_norm(diff, alpha) ** alpha / alpha + lp_norm(diff, gam) ** gam / gam)
    )
    return float(f(u)), float(rhs)
