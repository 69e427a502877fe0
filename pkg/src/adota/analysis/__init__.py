"""Convergence-bound evaluation, tail-index estimation and inequality oracles."""

from .bounds import (
    BoundDomainError,
    BoundInputs,
    adagrad_bound,
    adagrad_bound_terms,
    adam_bound,
    adam_bound_terms,
    evaluate,
    upsilon,
)
from .inequalities import (
    alpha_norm_expansion_sides,
    cumulative_ratio_sides,
    ema_ratio_sides,
    smoothness_sides,
)
from .tail import TailIndexEstimate, estimate_tail_index, hill_estimate

__all__ = [
    "BoundDomainError", "BoundInputs", "adagrad_bound", "adagrad_bound_terms", "adam_bound",
    "adam_bound_terms", "evaluate", "upsilon", "alpha_norm_expansion_sides",
    "cumulative_ratio_sides", "ema_ratio_sides", "smoothness_sides", "TailIndexEstimate",
    "estimate_tail_index", "hill_estimate",
]
