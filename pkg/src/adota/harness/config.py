"""Run configuration: strict JSON loading, validation and sweep-axis edits.

A config is a single JSON document. Unknown keys anywhere are rejected so a
typo in a sweep file cannot silently fall back to a default.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path

from ..channel import FadingKind, FadingModel, InterferenceModel
from ..optimizers import OptimizerKind, ServerHyperParams
from ..tasks import LossKind


class ConfigError(ValueError):
    pass


@dataclass
class DatasetSpec:
    kind: str = "gaussian_mixture"  # gaussian_mixture | linear_regression | csv
    n_samples: int = 5000
    n_test: int = 1000
    n_features: int = 49
    n_classes: int = 10
    class_sep: float = 0.3
    noise: float = 1.0
    path: str | None = None
    test_fraction: float = 0.2
    seed: int = 0


@dataclass
class TaskSpec:
    model: str = "softmax"
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    n_clients: int = 50
    dirichlet: float | None = 0.1  # None -> uniform iid split
    model_options: dict = field(default_factory=dict)
    local_steps: int = 1
    local_lr: float = 0.1


@dataclass
class FadingSpec:
    kind: str = "rayleigh"
    mean: float = 1.0
    std: float | None = None  # only free for gaussian_truncated

    def build(self) -> FadingModel:
        kind = FadingKind(self.kind)
        if kind is FadingKind.RAYLEIGH:
            model = FadingModel.rayleigh(self.mean)
            if self.std is not None and abs(self.std - model.std) > 1e-9:
                raise ConfigError("Rayleigh std is implied by its mean; leave it unset")
            return model
        if kind is FadingKind.CONSTANT:
            return FadingModel.constant(self.mean)
        if self.std is None:
            raise ConfigError("gaussian_truncated fading needs a std")
        return FadingModel.gaussian_truncated(self.mean, self.std)


@dataclass
class InterferenceSpec:
    tail_index: float = 1.5
    scale: float = 0.1


@dataclass
class ChannelSpec:
    fading: FadingSpec = field(default_factory=FadingSpec)
    interference: InterferenceSpec = field(default_factory=InterferenceSpec)


@dataclass
class OptimizerSpec:
    kind: str = "adagrad_ota"
    eta: float = 0.1
    beta1: float = 0.0
    beta2: float = 0.3
    epsilon: float = 1e-6
    alpha_exp: float | None = None  # None -> channel tail index
    v_init: float = 0.0
    w_init: str = "auto"  # auto | zeros | uniform


@dataclass
class RunConfig:
    task: TaskSpec = field(default_factory=TaskSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    rounds: int = 200
    eval_every: int | None = None  # None -> 1 for T <= 500, else 5
    seed: int = 0
    output: str | None = None
    allow_alpha_mismatch: bool = False

    # -- derived views -------------------------------------------------
    @property
    def alpha_exp(self) -> float:
        a = self.optimizer.alpha_exp
        return self.channel.interference.tail_index if a is None else a

    @property
    def eval_cadence(self) -> int:
        if self.eval_every is not None:
            return self.eval_every
        return 1 if self.rounds <= 500 else 5

    def hyperparams(self) -> ServerHyperParams:
        o = self.optimizer
        return ServerHyperParams(o.eta, o.beta1, o.beta2, o.epsilon, self.alpha_exp)

    def fading_model(self) -> FadingModel:
        return self.channel.fading.build()

    def interference_model(self, dimension: int) -> InterferenceModel:
        i = self.channel.interference
        return InterferenceModel(i.tail_index, i.scale, dimension)

    def validate(self) -> RunConfig:
        """Check every component; raises ConfigError with the first problem."""
        try:
            if int(self.rounds) != self.rounds or self.rounds < 1:
                raise ConfigError("rounds must be an integer >= 1")
            if self.eval_every is not None and self.eval_every < 1:
                raise ConfigError("eval_every must be >= 1")
            if self.seed < 0 or int(self.seed) != self.seed:
                raise ConfigError("seed must be a non-negative integer")
            t = self.task
            LossKind(t.model)
            if t.n_clients < 1:
                raise ConfigError("n_clients must be >= 1")
            if t.dirichlet is not None and not t.dirichlet > 0:
                raise ConfigError("dirichlet concentration must be > 0")
            if t.local_steps < 1 or not t.local_lr > 0:
                raise ConfigError("local_steps must be >= 1 and local_lr > 0")
            if t.dataset.kind not in ("gaussian_mixture", "linear_regression", "csv"):
                raise ConfigError(f"unknown dataset kind {t.dataset.kind!r}")
            if t.dataset.kind == "csv" and not t.dataset.path:
                raise ConfigError("csv dataset needs a path")
            self.fading_model()
            self.interference_model(1)
            OptimizerKind(self.optimizer.kind)
            self.hyperparams()
            if self.optimizer.v_init < 0:
                raise ConfigError("v_init must be >= 0")
            if self.optimizer.w_init not in ("auto", "zeros", "uniform"):
                raise ConfigError(f"unknown w_init policy {self.optimizer.w_init!r}")
            if (
                self.optimizer.alpha_exp is not None
                and self.optimizer.alpha_exp != self.channel.interference.tail_index
                and not self.allow_alpha_mismatch
            ):
                raise ConfigError(
                    "optimizer.alpha_exp differs from the channel tail index; "
                    "set allow_alpha_mismatch to run this ablation"
                )
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def resolved(self) -> dict:
        """Config with implied values (alpha_exp, eval cadence) filled in."""
        d = self.to_dict()
        d["optimizer"]["alpha_exp"] = self.alpha_exp
        d["eval_every"] = self.eval_cadence
        return d

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        return _build(cls, data, "config").validate()

    @classmethod
    def load(cls, path: str | Path, **overrides) -> RunConfig:
        """Read a JSON config; top-level overrides are applied before validation."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if isinstance(data, dict):
            data.update(overrides)
        return cls.from_dict(data)

    def copy(self) -> RunConfig:
        return copy.deepcopy(self)


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for name, value in data.items():
        hint = hints[name]
        if dataclasses.is_dataclass(hint):
            value = _build(hint, value, f"{where}.{name}")
        kwargs[name] = value
    return cls(**kwargs)


# Short names for the axes swept in experiments.
AXIS_ALIASES = {
    "alpha": "channel.interference.tail_index",
    "tail_index": "channel.interference.tail_index",
    "scale": "channel.interference.scale",
    "N": "task.n_clients",
    "n_clients": "task.n_clients",
    "Dir": "task.dirichlet",
    "dirichlet": "task.dirichlet",
    "beta1": "optimizer.beta1",
    "beta2": "optimizer.beta2",
    "eta": "optimizer.eta",
    "epsilon": "optimizer.epsilon",
    "optimizer": "optimizer.kind",
    "mu_c": "channel.fading.mean",
    "rounds": "rounds",
}


def resolve_axis(axis: str) -> str:
    path = AXIS_ALIASES.get(axis, axis)
    obj = RunConfig()
    *parents, leaf = path.split(".")
    for p in parents:
        if not dataclasses.is_dataclass(obj) or not hasattr(obj, p):
            raise ConfigError(f"unknown sweep axis {axis!r}")
        obj = getattr(obj, p)
    if not dataclasses.is_dataclass(obj) or leaf not in {f.name for f in dataclasses.fields(obj)}:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    if dataclasses.is_dataclass(getattr(obj, leaf)):
        raise ConfigError(f"sweep axis {axis!r} is not a scalar field")
    return path


def with_value(config: RunConfig, axis: str, value) -> RunConfig:
    """Copy of ``config`` with one (possibly aliased) field replaced."""
    path = resolve_axis(axis)
    out = config.copy()
    *parents, leaf = path.split(".")
    obj = out
    for p in parents:
        obj = getattr(obj, p)
    setattr(obj, leaf, value)
    return out.validate()
