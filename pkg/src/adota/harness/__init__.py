"""Experiment orchestration: configs, seeded streams, the round loop, sweeps, export."""

from .config import ConfigError, RunConfig, resolve_axis, with_value
from .export import COLUMNS, export_metrics, read_metrics
from .plotting import emit_plot_script
from .simulation import FederatedTask, MetricsRecord, build_task, run_simulation
from .streams import stream
from .sweep import SweepTable, run_sweep

__all__ = [
    "ConfigError", "RunConfig", "resolve_axis", "with_value", "COLUMNS", "export_metrics",
    "read_metrics", "emit_plot_script", "FederatedTask", "MetricsRecord", "build_task",
    "run_simulation", "stream", "SweepTable", "run_sweep",
]
