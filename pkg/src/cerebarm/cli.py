"""Command-line harness: run, compare, metrics, plot."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig, parse_config
from .errors import CerebarmError, NumericalDivergenceError
from .experiment import compare_strategies, compute_metrics, run_experiment
from .logio import (emit_plot, read_log_csv, write_csv, write_report_csv,
                    write_weights_csv)

EXIT_OK = 0
EXIT_ERROR = 1       # configuration or usage problems
EXIT_DIVERGED = 2    # plant integration blew up; partial log written


def _load_config(path) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return parse_config(path)


def _print_metrics(metrics, label=""):
    head = f"[{label}] " if label else ""
    print(f"{head}rmse={metrics.rmse:.6g} rad  max|e|={metrics.max_abs_error:.6g} rad  "
          f"mean|u_pd|={metrics.mean_abs_u_pd:.6g}  mean|u_ff|={metrics.mean_abs_u_ff:.6g}")
    spikes = " ".join(f"{k}={v}" for k, v in metrics.spikes.items())
    print(f"{head}spikes: {spikes}  weight_drift={metrics.weight_drift:.6g}")


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        log = run_experiment(cfg)
    except NumericalDivergenceError as exc:
        partial = getattr(exc, "partial_log", None)
        if partial is not None:
            write_csv(partial, out)
        print(f"run diverged: {exc} {exc.diagnostics}", file=sys.stderr)
        print(f"partial log written to {out}", file=sys.stderr)
        return EXIT_DIVERGED
    write_csv(log, out)
    print(f"log written to {out} ({log.n_rows} rows)")
    windows = (0.0, float(cfg.duration))
    _print_metrics(compute_metrics(log, windows), cfg.control.mode.value)
    if args.weights:
        write_weights_csv(log, args.weights)
        print(f"weight snapshots written to {args.weights}")
    if args.plot:
        emit_plot(log, args.plot)
        print(f"plot written to {args.plot}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        report = compare_strategies(cfg)
    except NumericalDivergenceError as exc:
        print(f"comparison diverged: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_DIVERGED
    for name, log in report.logs.items():
        write_csv(log, out_dir / f"{name.lower()}.csv")
    write_report_csv(report, out_dir / "report.csv")
    t0, t1 = report.eval_window
    print(f"evaluation window: [{t0:g}, {t1:g}) s")
    for name, m in report.metrics.items():
        ratio = report.rmse_ratio_vs_pd[name]
        print(f"{name:>11}: rmse={m.rmse:.6g} rad  ratio_vs_pd={ratio:.4f}  "
              f"mean|u_ff|={m.mean_abs_u_ff:.6g}")
    print(f"logs and report written to {out_dir}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    log = read_log_csv(args.csv)
    if log.n_rows == 0:
        print("empty log", file=sys.stderr)
        return EXIT_ERROR
    t0 = args.t0 if args.t0 is not None else float(log.t[0])
    t1 = args.t1 if args.t1 is not None else float(log.t[-1]) + 1e-9
    _print_metrics(compute_metrics(log, (t0, t1)))
    return EXIT_OK


def cmd_plot(args) -> int:
    log = read_log_csv(args.csv)
    emit_plot(log, args.out)
    print(f"plot written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cerebarm",
        description="Spiking cerebellar feed-forward control of a "
                    "pneumatic-muscle arm: simulation harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write its log CSV")
    p_run.add_argument("config", nargs="?", default=None,
                       help="TOML config file (defaults apply when omitted)")
    p_run.add_argument("--out", default="out/run.csv", help="log CSV path")
    p_run.add_argument("--weights", default=None,
                       help="also export weight snapshots to this CSV")
    p_run.add_argument("--plot", default=None, help="also write a tracking plot")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser(
        "compare", help="run all three control strategies and write a report")
    p_cmp.add_argument("config", nargs="?", default=None)
    p_cmp.add_argument("--out-dir", default="out", help="output directory")
    p_cmp.set_defaults(func=cmd_compare)

    p_met = sub.add_parser("metrics", help="recompute metrics from a log CSV")
    p_met.add_argument("csv")
    p_met.add_argument("--t0", type=float, default=None)
    p_met.add_argument("--t1", type=float, default=None)
    p_met.set_defaults(func=cmd_metrics)

    p_plot = sub.add_parser("plot", help="render the tracking plot from a log CSV")
    p_plot.add_argument("csv")
    p_plot.add_argument("out")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CerebarmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
