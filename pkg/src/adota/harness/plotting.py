"""gnuplot script generation for loss / accuracy curves."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .export import _fmt


def _mean_curve(runs):
    rounds = [r.round for r in runs[0].records]
    n = min(len(r.records) for r in runs)
    loss = np.array([[rec.global_train_loss for rec in r.records[:n]] for r in runs])
    acc = np.array([[rec.test_accuracy for rec in r.records[:n]] for r in runs])
    return rounds[:n], loss.mean(axis=0), acc.mean(axis=0)


def emit_plot_script(table, path) -> Path:
    """Write per-value mean curves next to ``path`` and a gnuplot script.

    The script renders ``<stem>_loss.svg`` and, for classification runs,
    ``<stem>_accuracy.svg`` with one curve per sweep value.
    """
    if not table.runs:
        raise ValueError("cannot plot an empty sweep table")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    curve_dir = path.parent / f"{path.stem}_curves"
    curve_dir.mkdir(exist_ok=True)
    curves = []
    has_acc = False
    for i, v in enumerate(table.values):
        runs = table.runs_for(v)
        if not runs:
            continue
        rounds, loss, acc = _mean_curve(runs)
        has_acc |= not all(math.isnan(a) for a in acc)
        cpath = curve_dir / f"curve_{i}.csv"
        with open(cpath, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["round", "loss_mean", "accuracy_mean"])
            for row in zip(rounds, loss, acc):
                w.writerow([row[0], _fmt(row[1]), _fmt(row[2])])
        curves.append((cpath.relative_to(path.parent).as_posix(), f"{table.axis}={v}"))

    def plot_cmd(col):
        parts = [f"'{c}' using 1:{col} with lines title '{label}'" for c, label in curves]
        return "plot " + ", \\\n     ".join(parts)

    lines = [
        "# gnuplot script; run from this directory: gnuplot " + path.name,
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set key outside right",
        "set xlabel 'round'",
        "set terminal svg size 800,500",
        f"set output '{path.stem}_loss.svg'",
        "set ylabel 'training loss'",
        "set logscale y",
        plot_cmd(2),
        "unset logscale y",
    ]
    if has_acc:
        lines += [
            f"set output '{path.stem}_accuracy.svg'",
            "set ylabel 'test accuracy'",
            plot_cmd(3),
        ]
    lines.append("set output")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
