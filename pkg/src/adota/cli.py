"""Command line entry point: ``adota {run,sweep,bound,estimate-alpha,selftest}``.

Exit codes: 0 success, 1 failed selftest, 2 bad config or inputs, 3 a run diverged.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import BoundInputs, evaluate, hill_estimate
from .analysis.selftest import run_selftest
from .harness import ConfigError, RunConfig, emit_plot_script, export_metrics, run_sweep
from .harness.simulation import run_simulation

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3

log = logging.getLogger("adota")


def _load_config(args) -> RunConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.allow_alpha_mismatch:
        overrides["allow_alpha_mismatch"] = True
    if args.config:
        return RunConfig.load(args.config, **overrides)
    cfg = RunConfig()
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg.validate()


def _parse_value(token: str):
    try:
        return json.loads(token)
    except json.JSONDecodeError:
        return token


def _out_dir(args, cfg: RunConfig, default: str) -> Path:
    return Path(args.out or cfg.output or default)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    records = run_simulation(cfg, workers=args.workers)
    out = _out_dir(args, cfg, "adota-run")
    path = export_metrics(records, out / "metrics.csv", cfg.resolved())
    last = records[-1]
    print(f"{path}: {len(records)} records, final loss {last.global_train_loss:.6g}, "
          f"accuracy {last.test_accuracy:.4g}")
    if last.diverged:
        print(f"diverged at round {last.round}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = [_parse_value(v) for v in args.values.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(range(5))
    out = _out_dir(args, cfg, "adota-sweep")
    table = run_sweep(cfg, args.axis, values, seeds, workers=args.workers, out_dir=out)
    emit_plot_script(table, out / "plot.gp")
    for row in table.summary():
        print(f"{args.axis}={row.value}: loss {row.final_loss_mean:.6g} +- {row.final_loss_std:.2g}, "
              f"accuracy {row.final_accuracy_mean:.4g}, diverged {row.n_diverged}/{row.n_seeds}")
    print(f"summary written to {out / 'summary.csv'}")
    return EXIT_OK


def cmd_bound(args) -> int:
    try:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        inputs = BoundInputs.from_dict(data)
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad bound inputs: {exc}") from exc
    record = evaluate(inputs, args.which)
    text = json.dumps(record, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    failed = [k for k in ("adagrad", "adam") if "error" in record.get(k, {})]
    return EXIT_CONFIG if failed else EXIT_OK


def cmd_estimate_alpha(args) -> int:
    try:
        samples = np.loadtxt(args.samples, dtype=np.float64, ndmin=1, delimiter=args.delimiter)
        est = hill_estimate(samples, args.k)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps({"alpha": est.alpha, "raw": est.raw, "out_of_range": est.out_of_range,
                      "k": est.k, "n": int(samples.size)}, indent=2))
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = run_selftest(args.instances, args.seed or 0)
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} {r.name}: {r.instances} instances, {r.violations} violations, "
              f"worst margin {r.worst_margin:.3g}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adota", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=False):
        sp.add_argument("--config", required=config_required, help="JSON config file")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--allow-alpha-mismatch", action="store_true")

    sp = sub.add_parser("run", help="one simulation")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="axis x seed sweep")
    common(sp)
    sp.add_argument("--axis", required=True, help="e.g. alpha, N, Dir, beta2, optimizer")
    sp.add_argument("--values", required=True, help="comma separated, JSON literals")
    sp.add_argument("--seeds", help="comma separated (default 0,1,2,3,4)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bound", help="evaluate the AdaGrad/Adam convergence bounds")
    sp.add_argument("--config", required=True, help="JSON object of bound inputs")
    sp.add_argument("--which", choices=("both", "adagrad", "adam"), default="both")
    sp.add_argument("--out", help="also write the JSON record here")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("estimate-alpha", help="Hill tail-index estimate from a sample file")
    sp.add_argument("samples", help="text file of numbers")
    sp.add_argument("--k", type=int, help="order statistics used (default floor(sqrt(n)))")
    sp.add_argument("--delimiter", default=None)
    sp.set_defaults(func=cmd_estimate_alpha)

    sp = sub.add_parser("selftest", help="randomized inequality oracles")
    sp.add_argument("--instances", type=int, default=10_000)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
