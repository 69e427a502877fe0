"""Metrics CSV and JSON sidecar I/O."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .simulation import MetricsRecord

COLUMNS = (
    "round",
    "global_train_loss",
    "grad_norm_sq",
    "test_accuracy",
    "effective_step_min",
    "effective_step_median",
    "effective_step_max",
    "diverged",
)


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def format_row(r: MetricsRecord) -> list[str]:
    return [
        str(r.round),
        *(_fmt(getattr(r, c)) for c in COLUMNS[1:-1]),
        "true" if r.diverged else "false",
    ]


def export_metrics(records, path, config: dict | None = None) -> Path:
    """Write ``records`` as CSV; with ``config`` also write ``<stem>.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in records:
            writer.writerow(format_row(r))
    if config is not None:
        sidecar = path.with_suffix(".json")
        sidecar.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_metrics(path) -> list[MetricsRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header}")
        out = []
        for row in reader:
            out.append(
                MetricsRecord(
                    int(row[0]),
                    *(float(x) for x in row[1:-1]),
                    diverged=row[-1] == "true",
                )
            )
    return out
