"""CSV serialization of logs and reports, and the tracking plot.

Float cells are written with shortest round-trip precision (repr), so a
re-parsed log equals the in-memory values exactly and identical runs
produce byte-identical files. The column order is fixed and stamped in
the leading header comment.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import CerebarmError, ContractViolationError
from .experiment import LOG_COLUMNS, ExperimentLog, StrategyComparison

LOG_FORMAT_VERSION = "cerebarm-log v1"
REPORT_FORMAT_VERSION = "cerebarm-report v1"
WEIGHTS_FORMAT_VERSION = "cerebarm-weights v1"

REPORT_COLUMNS = (
    "strategy", "eval_t0", "eval_t1", "rmse", "max_abs_error",
    "mean_abs_u_pd", "mean_abs_u_ff",
    "spikes_mf", "spikes_gr", "spikes_pk", "spikes_io", "spikes_dcn",
    "weight_drift", "rmse_ratio_vs_pd",
)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _open_for_write(path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise CerebarmError(f"cannot write {path}: {exc}") from exc


def write_csv(log: ExperimentLog, path) -> None:
    """Write a run log; an empty log yields a header-only file."""
    with _open_for_write(path) as fh:
        fh.write(f"# {LOG_FORMAT_VERSION}; columns: {','.join(LOG_COLUMNS)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        cols = [log.columns[name] for name in LOG_COLUMNS]
        for row in zip(*cols):
            writer.writerow([_fmt(v) for v in row])


def read_log_csv(path) -> ExperimentLog:
    """Re-parse a log CSV (weight snapshots are not serialized in it)."""
    try:
        fh = open(path, "r", newline="")
    except OSError as exc:
        raise CerebarmError(f"cannot read {path}: {exc}") from exc
    with fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise CerebarmError(f"{path}: missing format header comment")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != LOG_COLUMNS:
            raise CerebarmError(f"{path}: unexpected column header {header}")
        rows = list(reader)
    log = ExperimentLog.allocate(len(rows))
    for i, row in enumerate(rows):
        if len(row) != len(LOG_COLUMNS):
            raise CerebarmError(f"{path}: malformed row {i + 2}")
        for name, cell in zip(LOG_COLUMNS, row):
            col = log.columns[name]
            if col.dtype.kind == "f":
                col[i] = float(cell)
            elif col.dtype.kind == "i":
                col[i] = int(cell)
            else:
                col[i] = cell
    return log


def write_report_csv(report: StrategyComparison, path) -> None:
    """Write the strategy-comparison report, one row per strategy."""
    t0, t1 = report.eval_window
    with _open_for_write(path) as fh:
        fh.write(f"# {REPORT_FORMAT_VERSION}; columns: {','.join(REPORT_COLUMNS)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for name, m in report.metrics.items():
            writer.writerow([_fmt(v) for v in (
                name, t0, t1, m.rmse, m.max_abs_error,
                m.mean_abs_u_pd, m.mean_abs_u_ff,
                m.spikes["mf"], m.spikes["gr"], m.spikes["pk"],
                m.spikes["io"], m.spikes["dcn"],
                m.weight_drift, report.rmse_ratio_vs_pd[name])])


def write_weights_csv(log: ExperimentLog, path) -> None:
    """Export the plastic-weight snapshots in long (t, pre, post, w) form."""
    with _open_for_write(path) as fh:
        fh.write(f"# {WEIGHTS_FORMAT_VERSION}; columns: t,pre,post,w\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t", "pre", "post", "w"))
        for t, w in log.snapshots:
            n_pre, n_post = w.shape
            for i in range(n_pre):
                row_t = _fmt(t)
                wi = w[i]
                for j in range(n_post):
                    writer.writerow((row_t, i, j, _fmt(wi[j])))


def emit_plot(log: ExperimentLog, path) -> None:
    """Vector plot of reference vs output with the error trace below."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if log.n_rows == 0:
        raise ContractViolationError("cannot plot an empty log")
    fig, (ax_top, ax_bot) = plt.subplots(
        2, 1, sharex=True, figsize=(9, 5.5),
        gridspec_kw={"height_ratios": [2, 1]})
    ax_top.plot(log.t, log.theta_des, label="reference", lw=1.2)
    ax_top.plot(log.t, log.theta, label="output", lw=1.0)
    ax_top.set_ylabel("angle [rad]")
    mode = log.meta.get("mode", "")
    ax_top.set_title(f"trajectory tracking{f' ({mode})' if mode else ''}")
    ax_top.legend(loc="upper right")
    ax_bot.plot(log.t, log.error, color="crimson", lw=0.9)
    ax_bot.axhline(0.0, color="gray", lw=0.6)
    ax_bot.set_ylabel("error [rad]")
    ax_bot.set_xlabel("time [s]")
    fig.tight_layout()
    try:
        fig.savefig(path)
    except OSError as exc:
        raise CerebarmError(f"cannot write plot {path}: {exc}") from exc
    finally:
        plt.close(fig)
