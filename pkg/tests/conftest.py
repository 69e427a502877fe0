from pathlib import Path

import numpy as np
import pytest

from adota.harness import RunConfig

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def load_config(name: str) -> RunConfig:
    return RunConfig.load(CONFIGS / name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def small_config(**overrides) -> RunConfig:
    """A seconds-scale softmax task for harness plumbing tests."""
    cfg = RunConfig()
    cfg.task.dataset.n_samples = 300
    cfg.task.dataset.n_test = 100
    cfg.task.dataset.n_features = 5
    cfg.task.dataset.n_classes = 3
    cfg.task.n_clients = 6
    cfg.task.dirichlet = 0.5
    cfg.rounds = 15
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return cfg.validate()
