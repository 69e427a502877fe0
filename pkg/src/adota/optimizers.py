"""Server-side update rules: AdaGrad-OTA, Adam-OTA and the FedAvgM baseline.

Every round the server smooths the received aggregate with momentum,
folds |delta|**alpha into an accumulator (sum for AdaGrad, EMA for Adam) and
takes a per-coordinate step eta * delta / (v + eps)**(1/alpha). FedAvgM keeps
the momentum but steps with a constant rate and no accumulator.

Note: momentum is applied before both accumulators, so AdaGrad-OTA only
reduces to momentum-free AdaGrad when ``beta1 == 0`` (the default here).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .paramath import NonFiniteError, abs_power, as_vector


class OptimizerKind(str, enum.Enum):
    ADAGRAD_OTA = "adagrad_ota"
    ADAM_OTA = "adam_ota"
    FEDAVGM = "fedavgm"


class DivergenceError(NonFiniteError):
    """The model left the finite range; carries the failing round."""

    def __init__(self, message: str, round: int | None = None):
        super().__init__(message)
        self.round = round


@dataclass(frozen=True)
class ServerHyperParams:
    eta: float
    beta1: float = 0.0
    beta2: float = 0.9
    epsilon: float = 1e-8
    alpha_exp: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not (0 <= self.beta1 < 1):
            raise ValueError(f"beta1 must lie in [0, 1), got {self.beta1}")
        if not (0 < self.beta2 < 1):
            raise ValueError(f"beta2 must lie in (0, 1), got {self.beta2}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not (1 < self.alpha_exp <= 2):
            raise ValueError(f"alpha_exp must lie in (1, 2], got {self.alpha_exp}")


@dataclass
class ServerState:
    kind: OptimizerKind
    w: np.ndarray
    delta: np.ndarray
    v: np.ndarray
    round: int = 0

    def __post_init__(self):
        self.kind = OptimizerKind(self.kind)
        self.w = as_vector(self.w)
        self.delta = as_vector(self.delta)
        self.v = as_vector(self.v)
        if not (self.w.size == self.delta.size == self.v.size):
            raise ValueError("w, delta and v must share one dimension")
        if np.any(self.v < 0):
            raise ValueError("accumulator v must be entrywise >= 0")

    @classmethod
    def initial(cls, kind, w0, v_init=None) -> ServerState:
        """State before round 0: delta_{-1} = 0, v_{-1} = v_init (default 0)."""
        w0 = as_vector(w0).copy()
        d = w0.size
        v = np.zeros(d) if v_init is None else np.broadcast_to(
            np.asarray(v_init, dtype=np.float64), (d,)
        ).copy()
        if OptimizerKind(kind) is OptimizerKind.FEDAVGM:
            v = np.zeros(d)
        return cls(kind, w0, np.zeros(d), v, 0)

    def effective_step(self, hp: ServerHyperParams) -> np.ndarray:
        """Per-coordinate step size eta / (v + eps)**(1/alpha)."""
        if self.kind is OptimizerKind.FEDAVGM:
            return np.full(self.w.size, hp.eta)
        return hp.eta / (self.v + hp.epsilon) ** (1.0 / hp.alpha_exp)


def momentum_update(delta_prev, g, beta1: float) -> np.ndarray:
    delta_prev, g = as_vector(delta_prev), as_vector(g)
    if delta_prev.size != g.size:
        raise ValueError("dimension mismatch")
    if not (0 <= beta1 < 1):
        raise ValueError(f"beta1 must lie in [0, 1), got {beta1}")
    return beta1 * delta_prev + (1.0 - beta1) * g


def accumulate_adagrad(v_prev, delta, alpha: float) -> np.ndarray:
    v_prev, delta = as_vector(v_prev), as_vector(delta)
    if np.any(v_prev < 0):
        raise ValueError("accumulator must be entrywise >= 0")
    if v_prev.size != delta.size:
        raise ValueError("dimension mismatch")
    return v_prev + abs_power(delta, alpha)


def accumulate_adam(v_prev, delta, alpha: float, beta2: float) -> np.ndarray:
    v_prev, delta = as_vector(v_prev), as_vector(delta)
    if not (0 < beta2 < 1):
        raise ValueError(f"beta2 must lie in (0, 1), got {beta2}")
    if np.any(v_prev < 0):
        raise ValueError("accumulator must be entrywise >= 0")
    if v_prev.size != delta.size:
        raise ValueError("dimension mismatch")
    return beta2 * v_prev + (1.0 - beta2) * abs_power(delta, alpha)


def apply_update(w, delta, v, eta: float, epsilon: float, alpha: float) -> np.ndarray:
    """w - eta * delta / (v + eps)**(1/alpha), entrywise."""
    w, delta, v = as_vector(w), as_vector(delta), as_vector(v)
    if np.any(v < 0):
        raise ValueError("accumulator must be entrywise >= 0")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    with np.errstate(over="ignore", invalid="ignore"):
        out = w - eta * delta / (v + epsilon) ** (1.0 / alpha)
    if not np.all(np.isfinite(out)):
        raise DivergenceError("model update produced non-finite coordinates")
    return out


def server_step(state: ServerState, hp: ServerHyperParams, g) -> ServerState:
    """One server round; returns a new state and leaves ``state`` untouched."""
    g = as_vector(g)
    if g.size != state.w.size:
        raise ValueError(f"aggregate has dimension {g.size}, model has {state.w.size}")
    try:
        delta = momentum_update(state.delta, g, hp.beta1)
        if state.kind is OptimizerKind.FEDAVGM:
            v = state.v
            with np.errstate(over="ignore", invalid="ignore"):
                w = state.w - hp.eta * delta
            if not np.all(np.isfinite(w)):
                raise DivergenceError("model update produced non-finite coordinates")
        else:
            if state.kind is OptimizerKind.ADAGRAD_OTA:
                v = accumulate_adagrad(state.v, delta, hp.alpha_exp)
            else:
                v = accumulate_adam(state.v, delta, hp.alpha_exp, hp.beta2)
            w = apply_update(state.w, delta, v, hp.eta, hp.epsilon, hp.alpha_exp)
    except NonFiniteError as exc:
        raise DivergenceError(str(exc), round=state.round) from exc
    return replace(state, w=w, delta=delta, v=v, round=state.round + 1)
