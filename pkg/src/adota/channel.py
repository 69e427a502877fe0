"""Analog multiple-access channel: fading gains, alpha-stable interference,
and the over-the-air aggregate the server receives.

All samplers take an explicit ``numpy.random.Generator``; nothing here owns
global random state.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .paramath import NonFiniteError, as_vector

# Var/mean^2 of a Rayleigh variable.
RAYLEIGH_CV2 = 4.0 / math.pi - 1.0


class FadingKind(str, enum.Enum):
    RAYLEIGH = "rayleigh"
    CONSTANT = "constant"
    GAUSSIAN_TRUNCATED = "gaussian_truncated"


@dataclass(frozen=True)
class FadingModel:
    """Distribution of the per-client channel gain.

    Rayleigh has one free parameter, so ``std`` is implied by ``mean``. Use
    ``GAUSSIAN_TRUNCATED`` to vary the spread independently; there ``mean``
    and ``std`` parameterize the normal before truncation at zero.
    """

    kind: FadingKind
    mean: float
    std: float

    def __post_init__(self):
        kind = FadingKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ValueError(f"fading mean must be > 0, got {self.mean}")
        if not (math.isfinite(self.std) and self.std >= 0):
            raise ValueError(f"fading std must be >= 0, got {self.std}")
        if kind is FadingKind.RAYLEIGH:
            expected = self.mean * math.sqrt(RAYLEIGH_CV2)
            if abs(self.std - expected) > 1e-9:
                raise ValueError(
                    f"Rayleigh std is fixed by the mean: expected {expected!r}, got {self.std!r}"
                )
        elif kind is FadingKind.CONSTANT and self.std != 0:
            raise ValueError("constant fading must have std = 0")

    @classmethod
    def rayleigh(cls, mean: float = 1.0) -> FadingModel:
        return cls(FadingKind.RAYLEIGH, mean, mean * math.sqrt(RAYLEIGH_CV2))

    @classmethod
    def constant(cls, value: float = 1.0) -> FadingModel:
        return cls(FadingKind.CONSTANT, value, 0.0)

    @classmethod
    def gaussian_truncated(cls, mean: float, std: float) -> FadingModel:
        return cls(FadingKind.GAUSSIAN_TRUNCATED, mean, std)

    @property
    def rayleigh_scale(self) -> float:
        # mean = sigma * sqrt(pi/2)
        return self.mean * math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class InterferenceModel:
    tail_index: float
    scale: float
    dimension: int

    def __post_init__(self):
        if not (1 < self.tail_index <= 2):
            raise ValueError(f"tail_index must lie in (1, 2], got {self.tail_index}")
        if not (math.isfinite(self.scale) and self.scale >= 0):
            raise ValueError(f"interference scale must be >= 0, got {self.scale}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dimension}")


def sample_fading(model: FadingModel, rng: np.random.Generator, size=None):
    """Draw channel gain(s). Returns a float when ``size`` is None."""
    kind = model.kind
    if kind is FadingKind.CONSTANT:
        out = np.full(() if size is None else size, model.mean, dtype=np.float64)
    elif kind is FadingKind.RAYLEIGH:
        out = rng.rayleigh(model.rayleigh_scale, size=size)
    elif kind is FadingKind.GAUSSIAN_TRUNCATED:
        if model.std == 0:
            out = np.full(() if size is None else size, model.mean, dtype=np.float64)
        else:
            lower = -model.mean / model.std
            out = stats.truncnorm.rvs(
                lower, np.inf, loc=model.mean, scale=model.std, size=size, random_state=rng
            )
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown fading kind {kind!r}")
    return float(out) if size is None else np.asarray(out, dtype=np.float64)


def sample_alpha_stable(alpha: float, scale: float, rng: np.random.Generator, size=None):
    """Symmetric alpha-stable draws by Chambers-Mallows-Stuck.

    Characteristic function exp(-|scale * t|**alpha): alpha=2 is
    Normal(0, 2 scale^2), alpha=1 is Cauchy(scale).
    """
    if not (0 < alpha <= 2):
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if not (math.isfinite(scale) and scale >= 0):
        raise ValueError(f"scale must be >= 0, got {scale}")
    if scale == 0:
        return 0.0 if size is None else np.zeros(size)
    v = rng.uniform(-math.pi / 2, math.pi / 2, size=size)
    if alpha == 1:
        x = np.tan(v)
    else:
        w = rng.standard_exponential(size=size)
        x = (
            np.sin(alpha * v)
            / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha)
        )
    x = scale * x
    return float(x) if size is None else x


def sample_interference(model: InterferenceModel, rng: np.random.Generator) -> np.ndarray:
    """One d-vector of i.i.d. symmetric alpha-stable entries."""
    return np.asarray(
        sample_alpha_stable(model.tail_index, model.scale, rng, size=model.dimension),
        dtype=np.float64,
    )


def ota_aggregate(local_grads, fadings, noise, n_clients: int | None = None) -> np.ndarray:
    """Server-side output: (1/N) sum_n h_n grad_n + noise.

    Summation runs in client order so the result does not depend on how the
    gradients were produced.
    """
    if isinstance(local_grads, np.ndarray) and local_grads.ndim == 2:
        # stacked (N, d) gradients: validate once instead of row by row
        grads = np.asarray(local_grads, dtype=np.float64)
        if grads.shape[1] == 0:
            raise ValueError("gradients must be non-empty")
        if not np.all(np.isfinite(grads)):
            raise NonFiniteError("gradient has non-finite coordinates")
    else:
        grads = [as_vector(g) for g in local_grads]
    h = np.asarray(fadings, dtype=np.float64).ravel()
    n = len(grads) if n_clients is None else int(n_clients)
    if n < 1 or len(grads) == 0:
        raise ValueError("need at least one client")
    if len(grads) != n or h.size != n:
        raise ValueError(
            f"got {len(grads)} gradients and {h.size} fadings for {n} clients"
        )
    d = grads[0].size
    xi = as_vector(noise)
    if xi.size != d or any(g.size != d for g in grads):
        raise ValueError("dimension mismatch between gradients and noise")
    acc = np.zeros(d)
    for hn, g in zip(h, grads):
        acc += hn * g
    return acc / n + xi
