"""Axis sweeps: value x seed cross products of independent runs."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, resolve_axis, with_value
from .export import _fmt, export_metrics
from .simulation import MetricsRecord, run_simulation


@dataclass
class SweepRun:
    value: object
    seed: int
    records: list[MetricsRecord]
    metrics_path: Path | None = None

    @property
    def final(self) -> MetricsRecord:
        return self.records[-1]


@dataclass
class SummaryRow:
    value: object
    n_seeds: int
    final_loss_mean: float
    final_loss_std: float
    final_accuracy_mean: float
    final_accuracy_std: float
    final_grad_norm_sq_mean: float
    final_grad_norm_sq_std: float
    n_diverged: int


SUMMARY_COLUMNS = (
    "axis_value", "n_seeds", "final_loss_mean", "final_loss_std", "final_accuracy_mean",
    "final_accuracy_std", "final_grad_norm_sq_mean", "final_grad_norm_sq_std", "n_diverged",
)


@dataclass
class SweepTable:
    axis: str
    values: list
    seeds: list[int]
    runs: list[SweepRun] = field(default_factory=list)

    def runs_for(self, value) -> list[SweepRun]:
        return [r for r in self.runs if r.value == value]

    def summary(self) -> list[SummaryRow]:
        rows = []
        for v in self.values:
            finals = [r.final for r in self.runs_for(v)]
            rows.append(SummaryRow(v, len(finals), *_mean_std([f.global_train_loss for f in finals]),
                                   *_mean_std([f.test_accuracy for f in finals]),
                                   *_mean_std([f.grad_norm_sq for f in finals]),
                                   sum(f.diverged for f in finals)))
        return rows

    def write_summary(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_COLUMNS)
            for r in self.summary():
                w.writerow([r.value, r.n_seeds, *(_fmt(x) for x in (
                    r.final_loss_mean, r.final_loss_std, r.final_accuracy_mean,
                    r.final_accuracy_std, r.final_grad_norm_sq_mean, r.final_grad_norm_sq_std,
                )), r.n_diverged])
        return path


def _mean_std(xs) -> tuple[float, float]:
    a = np.asarray(xs, dtype=np.float64)
    if a.size == 0:
        return math.nan, math.nan
    return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0


def _run_point(payload):
    cfg_dict, value, seed = payload
    cfg = RunConfig.from_dict(cfg_dict)
    return value, seed, run_simulation(cfg)


def run_sweep(
    base: RunConfig,
    axis: str,
    values,
    seeds,
    workers: int = 1,
    out_dir=None,
) -> SweepTable:
    """Run every (value, seed) pair; each run re-draws its own partition."""
    resolve_axis(axis)
    values, seeds = list(values), [int(s) for s in seeds]
    if not values or not seeds:
        raise ValueError("sweep needs at least one value and one seed")
    payloads = []
    for v in values:
        cfg = with_value(base, axis, v)
        for s in seeds:
            cfg.seed = s
            payloads.append((cfg.validate().to_dict(), v, s))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_point, payloads))
    else:
        results = [_run_point(p) for p in payloads]

    table = SweepTable(axis, values, seeds)
    for (cfg_dict, _, _), (v, s, records) in zip(payloads, results):
        run = SweepRun(v, s, records)
        if out_dir is not None:
            cfg = RunConfig.from_dict(cfg_dict)
            path = Path(out_dir) / f"{_slug(axis)}={v}" / f"seed={s}" / "metrics.csv"
            run.metrics_path = export_metrics(records, path, cfg.resolved())
        table.runs.append(run)
    if out_dir is not None:
        table.write_summary(Path(out_dir) / "summary.csv")
    return table


def _slug(axis: str) -> str:
    return axis.replace(".", "_")
