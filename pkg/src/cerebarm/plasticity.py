"""Spike-driven plasticity for the granule-to-Purkinje synapses.

Two opposing processes shape the plastic matrix. Potentiation is
unconditional: every presynaptic (granule) spike nudges that row up by
nu_ltp. Depression is gated by the teaching signal: when an olivary
neuron fires, every granule spike in the recent history is weighed by
the eligibility kernel

    k(x) = exp(x) - exp(4*x),   x = (t_spike - t_now) / tau_kernel <= 0,

and the weighted sum is subtracted from that neuron's Purkinje column.
The kernel vanishes at x = 0 (a simultaneous spike contributes nothing),
peaks at x = -ln(4)/3 and decays for older spikes, so depression credits
granule activity a few tens of milliseconds back.

The infinite past is truncated to a finite ``window``: contributions of
spikes older than the window are bounded by k(-window/tau_kernel) per
spike, about exp(-4) of the kernel peak at the defaults (200 ms window,
50 ms tau_kernel).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolationError
from .snn import SpikeVector, SynapseMatrix


@dataclass
class StdpParams:
    """Learning rates and time scales for the plasticity rule."""

    nu_ltp: float = 0.0002    # weight increment per granule spike
    nu_ltd: float = 0.002     # weight units per kernel-weighted history spike
    tau_kernel: float = 100.0  # ms mapped to one kernel unit
    window: float = 400.0     # ms of granule history retained

    def __post_init__(self):
        if self.nu_ltp < 0.0 or self.nu_ltd < 0.0:
            raise ContractViolationError("learning rates must be >= 0")
        if self.tau_kernel <= 0.0:
            raise ContractViolationError(
                f"tau_kernel must be > 0, got {self.tau_kernel}")
        if self.window <= 0.0:
            raise ContractViolationError(f"window must be > 0, got {self.window}")


def ltd_kernel(x):
    """Depression eligibility kernel exp(x) - exp(4x) for x <= 0.

    Non-negative on its domain, zero at x = 0, single maximum at
    x = -ln(4)/3. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr > 0.0):
        raise ContractViolationError(
            "kernel argument must be <= 0 (evaluated on past spikes only)")
    out = np.exp(arr) - np.exp(4.0 * arr)
    return out if arr.ndim else float(out)


class GrSpikeHistory:
    """Sliding window of recent granule spikes as flat (index, time) arrays.

    Spike times are non-decreasing in insertion order; anything strictly
    older than ``cursor - window`` is evicted when the cursor advances.
    """

    def __init__(self, window: float, cursor: float = 0.0):
        if window <= 0.0:
            raise ContractViolationError(f"window must be > 0, got {window}")
        self.window = float(window)
        self.cursor = float(cursor)
        self.idx = np.empty(0, dtype=np.int64)
        self.t = np.empty(0, dtype=float)

    def __len__(self) -> int:
        return self.idx.size


def record_gr_spikes(hist: GrSpikeHistory, gr_spikes: SpikeVector,
                     t: float) -> GrSpikeHistory:
    """Append this step's granule spikes at time t and evict stale entries."""
    if t < hist.cursor:
        raise ContractViolationError(
            f"history time moved backwards: cursor={hist.cursor}, t={t}")
    fired_idx = gr_spikes.indices
    if fired_idx.size:
        hist.idx = np.concatenate([hist.idx, fired_idx.astype(np.int64)])
        hist.t = np.concatenate([hist.t, np.full(fired_idx.size, float(t))])
    hist.cursor = float(t)
    keep_from = np.searchsorted(hist.t, hist.cursor - hist.window, side="left")
    if keep_from:
        hist.idx = hist.idx[keep_from:]
        hist.t = hist.t[keep_from:]
    return hist


def ltp_update(syn: SynapseMatrix, gr_spikes: SpikeVector,
               params: StdpParams) -> SynapseMatrix:
    """Potentiate every connected edge of every granule row that fired."""
    if gr_spikes.fired.shape != (syn.n_pre,):
        raise ContractViolationError(
            f"spike vector length {gr_spikes.fired.shape} does not match "
            f"n_pre={syn.n_pre}")
    rows = gr_spikes.indices
    if rows.size:
        updated = np.clip(syn.w[rows] + params.nu_ltp, syn.w_min, syn.w_max)
        syn.w[rows] = np.where(syn.mask[rows], updated, syn.w[rows])
    return syn


def ltd_update(syn: SynapseMatrix, hist: GrSpikeHistory, io_spikes: SpikeVector,
               t_now: float, params: StdpParams, io_to_pk) -> SynapseMatrix:
    """Depress the columns of fired olivary neurons by kernel-weighted history.

    For every olivary neuron that fired, targeting column j = io_to_pk[k]:
    each granule spike (i, t_s) in the window subtracts
    nu_ltd * k((t_s - t_now)/tau_kernel) from w[i][j] on connected edges,
    clamped to the weight bounds. Columns of silent olivary neurons are
    untouched.
    """
    if hist.cursor != t_now:
        raise ContractViolationError(
            f"history cursor ({hist.cursor}) must sit at t_now ({t_now})")
    fired_io = io_spikes.indices
    if not fired_io.size:
        return syn

    mapping = np.asarray(io_to_pk)
    if fired_io.max() >= mapping.shape[0]:
        raise ConfigurationError(
            f"olivary neuron {int(fired_io.max())} has no Purkinje column mapping")
    cols = mapping[fired_io]
    if np.any(cols < 0) or np.any(cols >= syn.n_post):
        raise ConfigurationError("olivary-to-Purkinje mapping out of range")
    if np.unique(cols).size != cols.size:
        raise ContractViolationError(
            "olivary-to-Purkinje mapping must be one-to-one among fired neurons")

    if len(hist):
        k = ltd_kernel((hist.t - t_now) / params.tau_kernel)
        per_row = np.bincount(hist.idx, weights=k, minlength=syn.n_pre)
    else:
        per_row = np.zeros(syn.n_pre)

    depressed = np.clip(syn.w[:, cols] - params.nu_ltd * per_row[:, None],
                        syn.w_min, syn.w_max)
    syn.w[:, cols] = np.where(syn.mask[:, cols], depressed, syn.w[:, cols])
    return syn
