"""Fixed-timestep leaky integrate-and-fire engine.

Everything neural in this package is built from four primitives: the
exact-exponential LIF update, delta-current synaptic propagation, a
deterministic rate encoder and an exponential-window rate decoder.

Conventions: time in milliseconds, rates in Hz, membrane potential
normalized so rest sits at 0 and threshold at 1 under default parameters.
The update is the exact solution of dv/dt = (-(v - v_rest) + r_gain*I)/tau_m
over one step with the input held constant, so it is stable at any dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError

# last_spike_time value for neurons that have never fired
NEVER_SPIKED = -math.inf


@dataclass
class LifParams:
    """Membrane constants shared by all neurons of one population."""

    tau_m: float = 20.0        # membrane time constant, ms
    v_rest: float = 0.0
    v_threshold: float = 1.0
    v_reset: float = 0.0
    refractory: float = 2.0    # ms
    r_gain: float = 1.0        # input-current-to-potential gain

    def __post_init__(self):
        if self.tau_m <= 0.0:
            raise ContractViolationError(f"tau_m must be > 0, got {self.tau_m}")
        if self.refractory < 0.0:
            raise ContractViolationError(
                f"refractory must be >= 0, got {self.refractory}")
        if self.v_reset >= self.v_threshold:
            raise ContractViolationError(
                f"v_reset ({self.v_reset}) must lie below v_threshold "
                f"({self.v_threshold})")
        if self.v_rest >= self.v_threshold:
            raise ContractViolationError(
                f"v_rest ({self.v_rest}) must lie below v_threshold "
                f"({self.v_threshold})")


@dataclass
class NeuronPopulation:
    """Per-neuron LIF state for one layer, advanced in place by lif_step."""

    size: int
    params: LifParams = field(default_factory=LifParams)
    v: np.ndarray | None = None
    refr_remaining: np.ndarray | None = None
    last_spike_time: np.ndarray | None = None
    t: float = 0.0  # population clock, ms

    def __post_init__(self):
        if self.size <= 0:
            raise ContractViolationError(f"population size must be > 0, got {self.size}")
        if self.v is None:
            self.v = np.full(self.size, self.params.v_rest, dtype=float)
        if self.refr_remaining is None:
            self.refr_remaining = np.zeros(self.size, dtype=float)
        if self.last_spike_time is None:
            self.last_spike_time = np.full(self.size, NEVER_SPIKED, dtype=float)
        for name in ("v", "refr_remaining", "last_spike_time"):
            arr = getattr(self, name)
            if arr.shape != (self.size,):
                raise ContractViolationError(
                    f"{name} must have shape ({self.size},), got {arr.shape}")


@dataclass
class SpikeVector:
    """Boolean spike pattern of one population at one timestamp (ms)."""

    fired: np.ndarray
    t: float

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.fired))

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.fired)


@dataclass
class SynapseMatrix:
    """Dense pre x post weights with a connectivity mask and clamp bounds.

    Disconnected edges (mask False) carry weight 0 and are never updated.
    ``sign`` selects the postsynaptic effect: +1 excitatory, -1 inhibitory.
    """

    n_pre: int
    n_post: int
    w: np.ndarray
    mask: np.ndarray
    sign: int = 1
    w_min: float = 0.0
    w_max: float = 1.0
    plastic: bool = False

    def __post_init__(self):
        shape = (self.n_pre, self.n_post)
        if self.w.shape != shape or self.mask.shape != shape:
            raise ContractViolationError(
                f"weight/mask arrays must have shape {shape}")
        if self.sign not in (-1, 1):
            raise ContractViolationError(f"sign must be +1 or -1, got {self.sign}")
        if self.w_min > self.w_max:
            raise ContractViolationError(
                f"w_min ({self.w_min}) exceeds w_max ({self.w_max})")
        self.w = self.w * self.mask  # zero off-mask entries
        connected = self.w[self.mask]
        if connected.size and (connected.min() < self.w_min
                               or connected.max() > self.w_max):
            raise ContractViolationError("initial weights outside clamp bounds")


def uniform_synapse(n_pre, n_post, weight, mask=None, sign=1, plastic=False,
                    w_min=0.0, w_max=None):
    """Build a SynapseMatrix with one weight on every connected edge."""
    if mask is None:
        mask = np.ones((n_pre, n_post), dtype=bool)
    if w_max is None:
        w_max = weight
    w = np.where(mask, float(weight), 0.0)
    return SynapseMatrix(n_pre=n_pre, n_post=n_post, w=w, mask=mask,
                         sign=sign, w_min=w_min, w_max=w_max, plastic=plastic)


def lif_step(pop: NeuronPopulation, input_current, dt: float) -> SpikeVector:
    """Advance a population by one step and return who fired.

    Neurons still refractory ignore input and hold v_reset for the whole
    step. A neuron that crosses threshold is reset and starts its
    refractory period; it cannot fire again until that period has fully
    elapsed.
    """
    if dt <= 0.0:
        raise ContractViolationError(f"dt must be > 0, got {dt}")
    current = np.asarray(input_current, dtype=float)
    if current.shape != (pop.size,):
        raise ContractViolationError(
            f"input_current must have shape ({pop.size},), got {current.shape}")

    p = pop.params
    in_refr = pop.refr_remaining > 0.0
    decay = math.exp(-dt / p.tau_m)
    v = p.v_rest + (pop.v - p.v_rest) * decay + p.r_gain * current * (1.0 - decay)
    v[in_refr] = p.v_reset

    fired = ~in_refr & (v >= p.v_threshold)
    v[fired] = p.v_reset

    pop.v = v
    pop.refr_remaining = np.maximum(pop.refr_remaining - dt, 0.0)
    pop.refr_remaining[fired] = p.refractory
    pop.t += dt
    pop.last_spike_time[fired] = pop.t
    return SpikeVector(fired=fired, t=pop.t)


def propagate(spikes: SpikeVector, syn: SynapseMatrix) -> np.ndarray:
    """Delta-current synapse: every spike injects sign*w into its targets."""
    if spikes.fired.shape != (syn.n_pre,):
        raise ContractViolationError(
            f"spike vector length {spikes.fired.shape} does not match "
            f"n_pre={syn.n_pre}")
    return syn.sign * (spikes.fired.astype(float) @ syn.w)


def regular_spike_encode(rate: float, accumulator: float, dt: float):
    """Deterministic rate coding: emit one spike per accumulated unit.

    The phase accumulator integrates rate*dt; on overflow a spike is
    emitted and one unit subtracted, so over any window the emitted count
    tracks floor(rate*T) to within one spike. Rates above 1000/dt Hz
    cannot be represented (at most one spike per step).
    """
    if rate < 0.0:
        raise ContractViolationError(f"rate must be >= 0, got {rate}")
    if dt <= 0.0:
        raise ContractViolationError(f"dt must be > 0, got {dt}")
    acc = accumulator + rate * dt / 1000.0
    fired = acc >= 1.0
    if fired:
        acc -= 1.0
    return fired, acc


def encode_rate_bank(rates, phase, dt, rng=None):
    """Vectorized regular_spike_encode over a bank of independent encoders.

    Mutates ``phase`` in place and returns the fired mask. With ``rng``
    given, spikes are drawn as a seeded Bernoulli(rate*dt) process instead
    (Poisson-like mode); the phase array is then left untouched.
    """
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < 0.0):
        raise ContractViolationError("rates must be >= 0")
    if rng is not None:
        return rng.random(rates.shape) < rates * dt / 1000.0
    phase += rates * dt / 1000.0
    fired = phase >= 1.0
    phase[fired] -= 1.0
    return fired


def exp_rate_decode(state: float, fired: bool, tau_out: float, dt: float) -> float:
    """One-pole firing-rate estimate in Hz.

    Each spike deposits 1000/tau_out so that a steady f Hz train settles
    to a sawtooth whose time average is exactly f; the instantaneous value
    ripples by 1000/tau_out around it.
    """
    if tau_out <= 0.0:
        raise ContractViolationError(f"tau_out must be > 0, got {tau_out}")
    r = state * math.exp(-dt / tau_out)
    if fired:
        r += 1000.0 / tau_out
    return r


def decode_rate_bank(rate_state, fired, tau_out, dt):
    """Vectorized exp_rate_decode; mutates ``rate_state`` in place."""
    if tau_out <= 0.0:
        raise ContractViolationError(f"tau_out must be > 0, got {tau_out}")
    rate_state *= math.exp(-dt / tau_out)
    rate_state[fired] += 1000.0 / tau_out
    return rate_state
