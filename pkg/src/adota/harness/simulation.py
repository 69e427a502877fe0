"""The training loop: clients -> channel -> server, one round at a time."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import channel
from ..optimizers import DivergenceError, OptimizerKind, ServerState, server_step
from ..tasks import (
    Dataset,
    LossKind,
    LossModel,
    Partition,
    dirichlet_partition,
    gaussian_mixture,
    iid_partition,
    linear_regression,
    load_csv,
    make_model,
    train_test_split,
)
from .config import ConfigError, RunConfig
from .streams import stream

log = logging.getLogger(__name__)

LOSS_LIMIT = 1e12


@dataclass(frozen=True)
class MetricsRecord:
    round: int
    global_train_loss: float
    grad_norm_sq: float
    test_accuracy: float
    effective_step_min: float
    effective_step_median: float
    effective_step_max: float
    diverged: bool = False


@dataclass
class FederatedTask:
    train: Dataset
    test: Dataset | None
    model: LossModel
    partition: Partition

    @property
    def n_clients(self) -> int:
        return self.partition.n_clients

    def client_loss_grad(self, n: int, w: np.ndarray):
        idx = self.partition.assignments[n]
        return self.model.loss_and_grad(w, self.train.features[idx], self.train.labels[idx])

    def accuracy(self, w) -> float:
        if self.test is None or not self.test.is_classification:
            return math.nan
        if self.model.kind is LossKind.QUADRATIC:
            return math.nan
        return float(np.mean(self.model.predict(w, self.test.features) == self.test.labels))


def load_dataset(config: RunConfig) -> tuple[Dataset, Dataset | None]:
    spec = config.task.dataset
    rng = stream(spec.seed, "dataset")
    if spec.kind == "gaussian_mixture":
        return gaussian_mixture(
            spec.n_samples, spec.n_features, spec.n_classes, rng,
            class_sep=spec.class_sep, noise=spec.noise, n_test=spec.n_test,
        )
    if spec.kind == "linear_regression":
        return linear_regression(
            spec.n_samples, spec.n_features, rng, noise=spec.noise, n_test=spec.n_test
        )
    return train_test_split(load_csv(spec.path), spec.test_fraction, rng)


def build_task(config: RunConfig) -> FederatedTask:
    train, test = load_dataset(config)
    t = config.task
    try:
        model = make_model(t.model, train, **t.model_options)
    except TypeError as exc:
        raise ConfigError(f"bad model_options: {exc}") from exc
    rng = stream(config.seed, "partition", t.n_clients)
    if t.dirichlet is None:
        partition = iid_partition(train, t.n_clients, rng)
    else:
        partition = dirichlet_partition(train, t.n_clients, t.dirichlet, rng)
    return FederatedTask(train, test, model, partition)


def initial_model(config: RunConfig, model: LossModel) -> np.ndarray:
    policy = config.optimizer.w_init
    if policy == "auto":
        policy = "uniform" if model.kind is LossKind.MLP else "zeros"
    if policy == "zeros":
        return np.zeros(model.dim)
    return stream(config.seed, "init").uniform(-0.1, 0.1, size=model.dim)


def _client_update(task: FederatedTask, config: RunConfig, n: int, w: np.ndarray):
    """Returns (loss at w, true gradient at w, uploaded vector)."""
    loss, grad = task.client_loss_grad(n, w)
    steps = config.task.local_steps
    if steps == 1:
        return loss, grad, grad
    lr = config.task.local_lr
    local = w - lr * grad
    for _ in range(steps - 1):
        local = local - lr * task.client_loss_grad(n, local)[1]
    return loss, grad, (w - local) / (lr * steps)


def _record(t, loss, grad, task, state, hp, diverged=False) -> MetricsRecord:
    step = state.effective_step(hp)
    return MetricsRecord(
        round=t,
        global_train_loss=float(loss),
        grad_norm_sq=float(grad @ grad),
        test_accuracy=task.accuracy(state.w),
        effective_step_min=float(step.min()),
        effective_step_median=float(np.median(step)),
        effective_step_max=float(step.max()),
        diverged=diverged,
    )


def _diverged_record(t, state, hp) -> MetricsRecord:
    step = state.effective_step(hp) if np.all(np.isfinite(state.v)) else np.array([math.nan])
    return MetricsRecord(
        t, math.inf, math.nan, math.nan,
        float(step.min()), float(np.median(step)), float(step.max()), True,
    )


def run_simulation(config: RunConfig, workers: int = 1, task: FederatedTask | None = None):
    """Run ``config.rounds`` rounds and return the evaluated MetricsRecords.

    Records are taken at w_t before round t's update, every
    ``config.eval_cadence`` rounds, plus the final model w_T. A non-finite
    model or a training loss above 1e12 ends the run with a record flagged
    ``diverged``.
    """
    config.validate()
    task = task or build_task(config)
    hp = config.hyperparams()
    n_clients = task.n_clients
    fading = config.fading_model()
    interference = config.interference_model(task.model.dim)
    state = ServerState.initial(
        OptimizerKind(config.optimizer.kind),
        initial_model(config, task.model),
        config.optimizer.v_init,
    )
    cadence = config.eval_cadence
    records: list[MetricsRecord] = []
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for t in range(config.rounds + 1):
            w = state.w
            if pool is None:
                out = [_client_update(task, config, n, w) for n in range(n_clients)]
            else:
                out = list(pool.map(lambda n: _client_update(task, config, n, w), range(n_clients)))
            loss = float(np.mean([o[0] for o in out]))
            true_grad = np.sum([o[1] for o in out], axis=0) / n_clients
            if not math.isfinite(loss) or loss > LOSS_LIMIT:
                log.warning("run diverged at round %d (loss %g)", t, loss)
                records.append(_diverged_record(t, state, hp))
                break
            if t % cadence == 0 or t == config.rounds:
                records.append(_record(t, loss, true_grad, task, state, hp))
            if t == config.rounds:
                break

            h = [channel.sample_fading(fading, stream(config.seed, "fading", n, t))
                 for n in range(n_clients)]
            xi = channel.sample_interference(interference, stream(config.seed, "interference", t))
            g = channel.ota_aggregate([o[2] for o in out], h, xi, n_clients)
            try:
                state = server_step(state, hp, g)
            except DivergenceError:
                log.warning("run diverged at round %d (non-finite model)", t)
                records.append(_diverged_record(t + 1, state, hp))
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return records
