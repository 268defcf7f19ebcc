"""Cascade controller: outer PD plus spiking feed-forward, inner valve loop.

The outer loop runs on the joint angle at the control tick. Its command
(in abstract command units) is the sum of a PD term on the tracking
error and the decoded network feed-forward term, mapped to a pressure
differential around a co-contraction baseline. The inner loop is a
hysteresis bang-bang per muscle driving the solenoid valve modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cerebellum import (CerebellarConfig, CerebellarNetwork, decode_dcn,
                         encode_io_error, encode_mossy, network_step)
from .errors import ContractViolationError
from .plant import PlantState, ValveCommand, ValveMode


class ControlMode(str, Enum):
    PD_ONLY = "PD_ONLY"
    FF_PLUS_FB = "FF_PLUS_FB"
    FF_ONLY = "FF_ONLY"


@dataclass
class PdGains:
    kp: float = 250.0   # command units per rad
    kd: float = 12.0    # command units per rad/s

    def __post_init__(self):
        if self.kp < 0.0 or self.kd < 0.0:
            raise ContractViolationError("PD gains must be >= 0")


@dataclass
class ControlConfig:
    gains: PdGains = field(default_factory=PdGains)
    p_base: float = 200e3          # Pa gauge co-contraction baseline
    u_to_pressure: float = 1000.0  # Pa per command unit
    hysteresis: float = 5e3        # Pa inner-loop deadband
    mode: ControlMode = ControlMode.FF_PLUS_FB
    dt_control: float = 1.0        # ms, also the network step
    derror_tau: float = 10.0       # ms, error-derivative filter

    def __post_init__(self):
        if self.p_base <= 0.0:
            raise ContractViolationError("p_base must be positive")
        if self.hysteresis <= 0.0:
            raise ContractViolationError("hysteresis must be positive")
        if self.dt_control <= 0.0 or self.derror_tau <= 0.0:
            raise ContractViolationError("time constants must be positive")
        self.mode = ControlMode(self.mode)


@dataclass
class ControllerState:
    """Outer-loop filter state plus encoder/decoder state for the network."""

    prev_error: float = 0.0
    derror_filt: float = 0.0
    mf_phase: np.ndarray | None = None
    io_phase: np.ndarray | None = None
    dcn_rate: np.ndarray | None = None
    rng: np.random.Generator | None = None  # only for poisson encoder mode
    initialized: bool = False


def make_controller_state(cfg: CerebellarConfig) -> ControllerState:
    """Fresh controller state with encoder phases staggered per neuron.

    Staggering spreads spike emission evenly across each bank (and
    symmetrically across the two olivary halves) instead of firing whole
    banks in lockstep volleys; it is deterministic.
    """
    half_io = cfg.n_io // 2
    half_mf = cfg.n_mf // 2
    mf_phase = (np.arange(cfg.n_mf) % half_mf) / half_mf
    io_phase = (np.arange(cfg.n_io) % half_io) / half_io
    rng = np.random.default_rng(cfg.rng_seed) if cfg.poisson_encoders else None
    return ControllerState(mf_phase=mf_phase, io_phase=io_phase,
                           dcn_rate=np.zeros(cfg.n_dcn), rng=rng)


@dataclass
class TickDiagnostics:
    """Per-tick record handed to the experiment logger."""

    error: float
    derror: float
    u_pd: float
    u_ff: float
    u_total: float
    p_ag_des: float
    p_ant_des: float
    spikes_mf: int = 0
    spikes_gr: int = 0
    spikes_pk: int = 0
    spikes_io: int = 0
    spikes_dcn: int = 0


def pd_control(error, derror, gains: PdGains) -> float:
    if not (math.isfinite(error) and math.isfinite(derror)):
        raise ContractViolationError("PD inputs must be finite")
    return gains.kp * error + gains.kd * derror


def pressure_setpoints(u_total, cfg: ControlConfig, p_max):
    """Split the scalar command into antagonistic pressure setpoints.

    The differential u_to_pressure*u_total is applied symmetrically
    around the co-contraction baseline and clamped to [0, p_max].
    """
    if not math.isfinite(u_total):
        raise ContractViolationError("u_total must be finite")
    half_dp = cfg.u_to_pressure * u_total / 2.0
    p_ag = min(max(cfg.p_base + half_dp, 0.0), p_max)
    p_ant = min(max(cfg.p_base - half_dp, 0.0), p_max)
    return p_ag, p_ant


def valve_controller(p_meas, p_des, hysteresis) -> ValveMode:
    """Bang-bang with a deadband: fill low, vent high, otherwise hold."""
    if p_meas < p_des - hysteresis:
        return ValveMode.FILL
    if p_meas > p_des + hysteresis:
        return ValveMode.VENT
    return ValveMode.HOLD


def cascade_step(ctrl: ControllerState, net: CerebellarNetwork, ref,
                 meas: PlantState, cfg: ControlConfig, p_max):
    """One outer-loop tick: error, PD, network step, setpoints, valves.

    ``ref`` is the (theta_des, omega_des) pair for this tick; ``p_max``
    the gauge supply limit used for setpoint clamping. Controller and
    network state advance in place. In PD_ONLY mode the network is not
    stepped at all (and no teaching spikes are emitted); in FF_ONLY the
    PD term is absent but the error still drives the olivary encoder.
    Returns the valve command and the tick diagnostics.
    """
    theta_des, omega_des = ref
    error = theta_des - meas.theta
    if not ctrl.initialized:
        ctrl.prev_error = error
        ctrl.initialized = True
    dt_s = cfg.dt_control / 1000.0
    raw_d = (error - ctrl.prev_error) / dt_s
    alpha = math.exp(-cfg.dt_control / cfg.derror_tau)
    ctrl.derror_filt = ctrl.derror_filt * alpha + raw_d * (1.0 - alpha)
    ctrl.prev_error = error

    u_pd = 0.0
    if cfg.mode is not ControlMode.FF_ONLY:
        u_pd = pd_control(error, ctrl.derror_filt, cfg.gains)

    u_ff = 0.0
    counts = None
    if cfg.mode is not ControlMode.PD_ONLY:
        t_ms = meas.t * 1000.0
        mf = encode_mossy(theta_des, omega_des, net.cfg, ctrl.mf_phase,
                          cfg.dt_control, ctrl.rng, t_ms=t_ms)
        io = encode_io_error(error, net.cfg, ctrl.io_phase,
                             cfg.dt_control, ctrl.rng, t_ms=t_ms)
        dcn = network_step(net, mf, io, cfg.dt_control)
        u_ff = decode_dcn(dcn, ctrl.dcn_rate, net.cfg, cfg.dt_control)
        counts = net.last_activity

    u_total = u_pd + u_ff
    p_ag_des, p_ant_des = pressure_setpoints(u_total, cfg, p_max)
    cmd = ValveCommand(
        agonist=valve_controller(meas.p_ag, p_ag_des, cfg.hysteresis),
        antagonist=valve_controller(meas.p_ant, p_ant_des, cfg.hysteresis))

    diag = TickDiagnostics(
        error=error, derror=ctrl.derror_filt, u_pd=u_pd, u_ff=u_ff,
        u_total=u_total, p_ag_des=p_ag_des, p_ant_des=p_ant_des)
    if counts is not None:
        diag.spikes_mf = counts.mf
        diag.spikes_gr = counts.gr
        diag.spikes_pk = counts.pk
        diag.spikes_io = counts.io
        diag.spikes_dcn = counts.dcn
    return cmd, diag
