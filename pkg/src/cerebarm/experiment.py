"""Experiment runner: reference generation, closed-loop runs, metrics.

A run wires a freshly built network, a controller and the plant into the
cascade loop, advances them tick by tick and records everything into an
ExperimentLog. compare_strategies repeats the identical experiment under
the three control modes and reports per-strategy metrics against the
PD-only baseline. Runs are bit-deterministic for a fixed configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cerebellum import build_network, weight_snapshot
from .config import ExperimentConfig, ReferenceConfig
from .control import ControlMode, cascade_step, make_controller_state
from .errors import ConfigurationError, ContractViolationError, \
    NumericalDivergenceError
from .plant import PlantState, plant_step

LOG_COLUMNS = (
    "t", "theta_des", "omega_des", "theta", "omega", "error",
    "u_pd", "u_ff", "u_total", "p_ag", "p_ant", "p_ag_des", "p_ant_des",
    "valve_ag", "valve_ant",
    "spikes_mf", "spikes_gr", "spikes_pk", "spikes_io", "spikes_dcn",
)
_FLOAT_COLUMNS = LOG_COLUMNS[:13]
_VALVE_COLUMNS = ("valve_ag", "valve_ant")
_COUNT_COLUMNS = LOG_COLUMNS[15:]


def reference_signal(ref: ReferenceConfig, t):
    """Desired angle and velocity at time t (seconds)."""
    if t < 0.0:
        raise ContractViolationError(f"t must be >= 0, got {t}")
    if ref.shape == "sine":
        w = 2.0 * math.pi * ref.frequency
        return (ref.offset + ref.amplitude * math.sin(w * t),
                ref.amplitude * w * math.cos(w * t))
    if ref.shape == "hold":
        return ref.offset + ref.amplitude, 0.0
    if ref.shape == "step":
        if t < ref.t_step:
            return ref.offset, 0.0
        return ref.offset + ref.amplitude, 0.0
    raise ConfigurationError(f"unknown reference shape {ref.shape!r}")


@dataclass
class ExperimentLog:
    """Column arrays over control ticks plus periodic weight snapshots."""

    columns: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)  # (t_s, weight matrix)
    meta: dict = field(default_factory=dict)

    @classmethod
    def allocate(cls, n, meta=None):
        cols = {}
        for name in _FLOAT_COLUMNS:
            cols[name] = np.zeros(n)
        for name in _VALVE_COLUMNS:
            cols[name] = np.empty(n, dtype="U4")
        for name in _COUNT_COLUMNS:
            cols[name] = np.zeros(n, dtype=np.int64)
        return cls(columns=cols, meta=dict(meta or {}))

    @property
    def n_rows(self) -> int:
        return len(self.columns["t"]) if self.columns else 0

    def truncated(self, n) -> "ExperimentLog":
        cols = {name: arr[:n] for name, arr in self.columns.items()}
        return ExperimentLog(columns=cols, snapshots=list(self.snapshots),
                             meta=dict(self.meta))

    def __getattr__(self, name):
        try:
            return self.__dict__["columns"][name]
        except KeyError:
            raise AttributeError(name)


@dataclass
class Metrics:
    """Tracking and activity statistics over one evaluation window."""

    rmse: float
    max_abs_error: float
    mean_abs_u_pd: float
    mean_abs_u_ff: float
    spikes: dict
    weight_drift: float
    window: tuple


def run_experiment(cfg: ExperimentConfig) -> ExperimentLog:
    """Run one closed-loop experiment and return its full log.

    The plant starts at rest at zero angle with both muscles at the
    co-contraction baseline. On numerical divergence the partial log is
    attached to the raised error as ``partial_log``.
    """
    net = build_network(cfg.network)
    ctrl = make_controller_state(cfg.network)
    state = PlantState(p_ag=cfg.control.p_base, p_ant=cfg.control.p_base)
    p_max = cfg.pneumatic.p_gauge_max
    dt_s = cfg.control.dt_control / 1000.0
    n = cfg.n_ticks
    snap_every = max(1, round(cfg.snapshot_period / dt_s))

    log = ExperimentLog.allocate(n, meta={
        "mode": cfg.control.mode.value, "seed": cfg.seed,
        "duration": cfg.duration, "training_duration": cfg.training_duration,
        "dt_control_ms": cfg.control.dt_control,
    })
    cols = log.columns

    dist = cfg.disturbance
    for k in range(n):
        t = k * dt_s
        if cfg.freeze_after_training and t >= cfg.training_duration:
            net.learning_enabled = False
        ref = reference_signal(cfg.reference, t)
        cmd, diag = cascade_step(ctrl, net, ref, state, cfg.control, p_max)

        cols["t"][k] = t
        cols["theta_des"][k] = ref[0]
        cols["omega_des"][k] = ref[1]
        cols["theta"][k] = state.theta
        cols["omega"][k] = state.omega
        cols["error"][k] = diag.error
        cols["u_pd"][k] = diag.u_pd
        cols["u_ff"][k] = diag.u_ff
        cols["u_total"][k] = diag.u_total
        cols["p_ag"][k] = state.p_ag
        cols["p_ant"][k] = state.p_ant
        cols["p_ag_des"][k] = diag.p_ag_des
        cols["p_ant_des"][k] = diag.p_ant_des
        cols["valve_ag"][k] = cmd.agonist.value
        cols["valve_ant"][k] = cmd.antagonist.value
        cols["spikes_mf"][k] = diag.spikes_mf
        cols["spikes_gr"][k] = diag.spikes_gr
        cols["spikes_pk"][k] = diag.spikes_pk
        cols["spikes_io"][k] = diag.spikes_io
        cols["spikes_dcn"][k] = diag.spikes_dcn
        if k % snap_every == 0:
            log.snapshots.append((t, weight_snapshot(net)))

        tau_ext = 0.0
        if dist is not None and dist.time <= t < dist.time + dist.width:
            tau_ext = dist.torque
        try:
            state = plant_step(state, cmd, cfg.arm, cfg.pam, cfg.pneumatic,
                               dt_s, cfg.n_substeps, tau_ext)
        except NumericalDivergenceError as exc:
            exc.partial_log = log.truncated(k + 1)
            raise

    log.snapshots.append((n * dt_s, weight_snapshot(net)))
    return log


def compute_metrics(log: ExperimentLog, window) -> Metrics:
    """Metrics over [t0, t1); raises on an empty selection."""
    t0, t1 = window
    t = log.t
    sel = (t >= t0) & (t < t1)
    if not np.any(sel):
        raise ContractViolationError(f"empty metrics window {window}")
    err = log.error[sel]
    spikes = {layer: int(log.columns[f"spikes_{layer}"][sel].sum())
              for layer in ("mf", "gr", "pk", "io", "dcn")}
    snaps = [w for ts, w in log.snapshots if t0 <= ts <= t1]
    drift = float(np.linalg.norm(snaps[-1] - snaps[0])) if len(snaps) >= 2 else 0.0
    return Metrics(
        rmse=float(np.sqrt(np.mean(err ** 2))),
        max_abs_error=float(np.max(np.abs(err))),
        mean_abs_u_pd=float(np.mean(np.abs(log.u_pd[sel]))),
        mean_abs_u_ff=float(np.mean(np.abs(log.u_ff[sel]))),
        spikes=spikes,
        weight_drift=drift,
        window=(float(t0), float(t1)),
    )


def period_breakdown(log: ExperimentLog, period_s):
    """Per-reference-period (rmse, mean |u_ff|) over the log, in order."""
    out = []
    t_end = float(log.t[-1]) + (log.t[1] - log.t[0] if log.n_rows > 1 else 0.0)
    k = 0
    while (k + 1) * period_s <= t_end + 1e-9:
        m = compute_metrics(log, (k * period_s, (k + 1) * period_s))
        out.append((m.rmse, m.mean_abs_u_ff))
        k += 1
    return out


STRATEGIES = (ControlMode.PD_ONLY, ControlMode.FF_PLUS_FB, ControlMode.FF_ONLY)


@dataclass
class StrategyComparison:
    """Per-strategy logs and metrics over a common evaluation window."""

    logs: dict
    metrics: dict
    rmse_ratio_vs_pd: dict
    eval_window: tuple


def compare_strategies(cfg: ExperimentConfig) -> StrategyComparison:
    """Run the three control strategies on identical reference and seed.

    The feed-forward modes learn online for training_duration, then all
    strategies are scored on the remaining evaluation window (plasticity
    stays active unless the freeze flag is set).
    """
    window = (cfg.training_duration, cfg.duration)
    logs, metrics = {}, {}
    for mode in STRATEGIES:
        log = run_experiment(cfg.with_mode(mode))
        logs[mode.value] = log
        metrics[mode.value] = compute_metrics(log, window)
    pd_rmse = metrics[ControlMode.PD_ONLY.value].rmse
    ratios = {name: (m.rmse / pd_rmse if pd_rmse > 0.0 else math.inf)
              for name, m in metrics.items()}
    return StrategyComparison(logs=logs, metrics=metrics,
                              rmse_ratio_vs_pd=ratios, eval_window=window)
