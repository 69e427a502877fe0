"""Closed-form convergence bounds for AdaGrad-OTA and Adam-OTA.

Both bound the average squared gradient norm (1/T) sum_t E||grad f(w_t)||^2.
``G`` (the alpha-th moment bound of the interference) is always supplied by
the caller: an exactly alpha-stable law has an infinite alpha-th moment, so
it cannot be estimated from samples. A truncated-noise surrogate is a
reasonable source when comparing bounds with simulations.

The AdaGrad step-size factors are eta**(alpha/gamma) and eta**(gamma/alpha),
the closed form; an intermediate step of the derivation has eta**alpha and
eta**gamma there instead.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..paramath import gamma_complement


class BoundDomainError(ValueError):
    """Inputs for which the bound's denominator is not positive."""


@dataclass(frozen=True)
class BoundInputs:
    f0_minus_fstar: float
    L: float
    C: float
    G: float
    mu_c: float
    sigma_c: float
    N: int
    d: int
    eta: float
    epsilon: float
    T: int
    alpha: float
    beta2: float | None = None

    def __post_init__(self):
        checks = [
            ("f0_minus_fstar", self.f0_minus_fstar >= 0),
            ("L", self.L > 0),
            ("C", self.C >= 0),
            ("G", self.G >= 0),
            ("sigma_c", self.sigma_c >= 0),
            ("N", self.N >= 1 and int(self.N) == self.N),
            ("d", self.d >= 1 and int(self.d) == self.d),
            ("eta", self.eta > 0),
            ("epsilon", self.epsilon > 0),
            ("T", self.T >= 1),
            ("alpha", 1 < self.alpha <= 2),
            ("mu_c", math.isfinite(self.mu_c)),
        ]
        if self.beta2 is not None:
            checks.append(("beta2", 0 < self.beta2 < 1))
        bad = [name for name, ok in checks if not ok]
        if bad:
            raise ValueError(f"invalid bound inputs: {', '.join(bad)}")

    @classmethod
    def from_dict(cls, data: dict) -> BoundInputs:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown bound input keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


def upsilon(b: BoundInputs) -> float:
    """4G + d^(1 - alpha/2) (mu_c^2 + sigma_c^2)^(alpha/2) C^alpha / N^(alpha/2)."""
    a = b.alpha
    fading = b.d ** (1 - a / 2) * (b.mu_c**2 + b.sigma_c**2) ** (a / 2) * b.C**a / b.N ** (a / 2)
    return 4 * b.G + fading


def adagrad_bound_terms(b: BoundInputs) -> dict[str, float]:
    if not b.mu_c - 1 > 0:
        raise BoundDomainError(f"denominator (mu_c - 1) = {b.mu_c - 1:g} must be positive")
    a, g = b.alpha, gamma_complement(b.alpha).gamma
    ups = upsilon(b)
    root_ups = ups ** (1 / a)
    t_root = b.T ** (1 / g)
    initial = b.f0_minus_fstar * root_ups / (b.eta * (b.mu_c - 1) * t_root)
    coeff = (
        b.eta ** (a / g) * b.L / a
        + b.eta ** (g / a) * b.L / g
        + root_ups
        + 1 / b.epsilon ** (1 / a)
    )
    accumulation = (
        coeff * b.d * root_ups / (2 * (b.mu_c - 1) * t_root) * math.log1p(ups * b.T / b.epsilon)
    )
    return {"upsilon": ups, "initial_gap": initial, "accumulation": accumulation}


def adagrad_bound(b: BoundInputs) -> float:
    t = adagrad_bound_terms(b)
    return t["initial_gap"] + t["accumulation"]


def adam_bound_terms(b: BoundInputs) -> dict[str, float]:
    if b.beta2 is None:
        raise ValueError("Adam bound needs beta2")
    denom = b.mu_c + b.beta2 - 1
    if not denom > 0:
        raise BoundDomainError(f"denominator (mu_c + beta2 - 1) = {denom:g} must be positive")
    a, g = b.alpha, gamma_complement(b.alpha).gamma
    ups = upsilon(b)
    root_ups = ups ** (1 / a)
    om = 1 - b.beta2
    initial = b.f0_minus_fstar * root_ups / (denom * b.eta * b.T)
    coeff = (
        b.eta ** (a / g) * b.L / a
        + (om ** (1 / g) * b.eta**g * b.L + g * om ** (g - 2) * root_ups)
        / (g * om ** (g + 1 / g - 2))
        + om / b.epsilon ** (1 / a)
    )
    scale = coeff * b.d * root_ups / (2 * denom)
    return {
        "upsilon": ups,
        "initial_gap": initial,
        "accumulation": scale * math.log1p(ups / b.epsilon) / b.T,
        "floor": scale * -math.log(b.beta2),
    }


def adam_bound(b: BoundInputs) -> float:
    t = adam_bound_terms(b)
    return t["initial_gap"] + t["accumulation"] + t["floor"]


def evaluate(b: BoundInputs, which: str = "both") -> dict:
    """JSON-ready record: upsilon plus bound value and breakdown per optimizer.

    A bound whose domain condition fails is reported with its diagnostic
    instead of a value.
    """
    out: dict = {"inputs": b.to_dict(), "upsilon": upsilon(b)}
    wanted = ("adagrad", "adam") if which == "both" else (which,)
    for name in wanted:
        fn = {"adagrad": adagrad_bound_terms, "adam": adam_bound_terms}[name]
        try:
            terms = fn(b)
        except (BoundDomainError, ValueError) as exc:
            out[name] = {"error": str(exc)}
            continue
        terms.pop("upsilon")
        out[name] = {"bound": sum(terms.values()), "terms": terms}
    return out
