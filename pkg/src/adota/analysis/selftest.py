"""Randomized checks of the inequality oracles, shared by the CLI and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inequalities import (
    alpha_norm_expansion_sides,
    cumulative_ratio_sides,
    ema_ratio_sides,
    smoothness_sides,
)

SLACK = 1e-9
PHIS = np.round(np.arange(0.1, 1.0, 0.1), 1)
EPSILONS = 10.0 ** np.arange(-8, 1)


@dataclass(frozen=True)
class CheckResult:
    name: str
    instances: int
    violations: int
    worst_margin: float  # min over instances of (rhs - lhs); negative means broken

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _tally(name, pairs) -> CheckResult:
    margins = np.array([rhs - lhs for lhs, rhs in pairs])
    return CheckResult(name, margins.size, int(np.sum(margins < -SLACK)), float(margins.min()))


def _random_seq(rng, max_len=100, high=10.0):
    n = int(rng.integers(1, max_len + 1))
    seq = rng.uniform(0, high, n)
    # sprinkle exact zeros and long runs of them; they are the edge cases
    seq[rng.random(n) < 0.2] = 0.0
    return seq


def check_cumulative_ratio(n: int, rng) -> CheckResult:
    pairs = (cumulative_ratio_sides(_random_seq(rng), rng.choice(EPSILONS)) for _ in range(n))
    return _tally("cumulative ratio", pairs)


def check_ema_ratio(n: int, rng) -> CheckResult:
    pairs = (
        ema_ratio_sides(_random_seq(rng), rng.choice(PHIS), rng.choice(EPSILONS)) for _ in range(n)
    )
    return _tally("ema ratio", pairs)


def check_alpha_norm_expansion(n: int, rng) -> CheckResult:
    def one():
        d = int(rng.integers(1, 17))
        scale = 10.0 ** rng.uniform(-3, 3)
        u = rng.standard_normal(d) * scale
        v = rng.standard_normal(d) * scale * 10.0 ** rng.uniform(-3, 3)
        return alpha_norm_expansion_sides(u, v, rng.uniform(1, 2))

    return _tally("alpha-norm expansion", (one() for _ in range(n)))


def check_smoothness(n: int, rng) -> CheckResult:
    """Diagonal quadratics 0.5 sum a_i x_i^2 whose alpha-norm smoothness is max a_i."""

    def one():
        d = int(rng.integers(1, 17))
        a = rng.uniform(0.1, 5.0, d)
        f = lambda x: 0.5 * float(np.sum(a * x * x))  # noqa: E731
        grad = lambda x: a * x  # noqa: E731
        u, v = rng.standard_normal(d) * 3, rng.standard_normal(d) * 3
        return smoothness_sides(f, grad, float(a.max()), u, v, rng.uniform(1.01, 2))

    return _tally("smoothness", (one() for _ in range(n)))


def run_selftest(instances: int = 10_000, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [
        check_cumulative_ratio(instances, rng),
        check_ema_ratio(instances, rng),
        check_alpha_norm_expansion(instances, rng),
        check_smoothness(instances, rng),
    ]
