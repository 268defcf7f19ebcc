"""Cerebellar network: populations, wiring, encoders and the motor decoder.

Five layers. Mossy fibers (mf) carry the desired trajectory, granule
cells (gr) expand it into a sparse code, Purkinje cells (pk) inhibit the
deep nuclei (dcn) which also receive direct mossy excitation, and the
inferior olive (io) delivers the teaching signal that gates depression
of the plastic gr->pk matrix. pk, io and dcn are split into equal
agonist/antagonist halves; the feed-forward command is the decoded
firing-rate difference between the dcn halves.

mf and io are encoder-driven input layers: their spike vectors are
produced by encode_mossy / encode_io_error rather than by lif_step, so
their membrane state stays idle. The olive is a pure teaching signal;
it injects no current into the Purkinje layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolationError
from .plasticity import (GrSpikeHistory, StdpParams, ltd_update, ltp_update,
                         record_gr_spikes)
from .snn import (LifParams, NeuronPopulation, SpikeVector, SynapseMatrix,
                  decode_rate_bank, encode_rate_bank, lif_step, propagate,
                  uniform_synapse)


@dataclass
class CerebellarConfig:
    """Population sizes, wiring constants, encoder and decoder scales.

    The layer counts 80/100/160/160/160 are the model's reference
    topology; pk, io and dcn must stay equal (one-to-one pairings) and
    even (antagonistic halves). Granule wiring is hierarchical: mossy
    fibers are split into ``mf_groups`` contiguous groups and each
    granule cell draws ``gr_fan_in`` inputs from exactly one group.
    """

    n_mf: int = 80
    n_gr: int = 100
    n_pk: int = 160
    n_io: int = 160
    n_dcn: int = 160
    mf_groups: int = 4
    gr_fan_in: int = 4

    # encoders
    mf_angle_range: float = 0.6      # rad, receptive-field half-width
    mf_velocity_range: float = 2.0   # rad/s
    mf_peak_rate: float = 100.0      # Hz
    rf_width_factor: float = 2.0     # tuning sigma as multiple of center spacing
    io_max_rate: float = 10.0        # Hz, climbing-fiber-like ceiling
    io_error_saturation: float = 0.3  # rad of error at which io saturates

    # decoder
    dcn_gain: float = 1.2            # command units per Hz of rate difference
    tau_out: float = 80.0            # ms, output rate-filter constant

    # fixed synaptic weights
    w_mf_gr: float = 14.0
    w_pk_dcn: float = 30.0
    w_mf_dcn: float = 4.0
    gr_pk_init: float = 0.5
    gr_pk_min: float = 0.0
    gr_pk_max: float = 1.0

    rng_seed: int = 42
    poisson_encoders: bool = False   # seeded stochastic encoding (off: deterministic)

    # mf and io are encoder-driven; their membrane params are idle defaults
    mf_lif: LifParams = field(default_factory=LifParams)
    gr_lif: LifParams = field(default_factory=lambda: LifParams(
        tau_m=20.0, refractory=2.0, r_gain=1.0))
    pk_lif: LifParams = field(default_factory=lambda: LifParams(
        tau_m=15.0, refractory=2.0, r_gain=3.0))
    io_lif: LifParams = field(default_factory=LifParams)
    dcn_lif: LifParams = field(default_factory=lambda: LifParams(
        tau_m=20.0, refractory=2.0, r_gain=1.0))
    stdp: StdpParams = field(default_factory=StdpParams)

    def __post_init__(self):
        counts = (self.n_mf, self.n_gr, self.n_pk, self.n_io, self.n_dcn)
        if any(n <= 0 for n in counts):
            raise ConfigurationError(f"population counts must be positive: {counts}")
        if not (self.n_pk == self.n_io == self.n_dcn):
            raise ConfigurationError(
                f"pk/io/dcn counts must match for one-to-one pairing, got "
                f"{self.n_pk}/{self.n_io}/{self.n_dcn}")
        if self.n_pk % 2:
            raise ConfigurationError(
                f"n_pk must be even for antagonistic halves, got {self.n_pk}")
        if self.n_mf % 2:
            raise ConfigurationError(
                f"n_mf must be even for angle/velocity channels, got {self.n_mf}")
        if self.n_mf % self.mf_groups or self.n_gr % self.mf_groups:
            raise ConfigurationError(
                f"mf_groups ({self.mf_groups}) must divide n_mf ({self.n_mf}) "
                f"and n_gr ({self.n_gr})")
        if not 0 < self.gr_fan_in <= self.n_mf // self.mf_groups:
            raise ConfigurationError(
                f"gr_fan_in ({self.gr_fan_in}) must fit within one mossy group "
                f"of {self.n_mf // self.mf_groups}")
        for name in ("mf_angle_range", "mf_velocity_range", "mf_peak_rate",
                     "io_max_rate", "io_error_saturation", "tau_out",
                     "rf_width_factor"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be > 0")
        if not self.gr_pk_min <= self.gr_pk_init <= self.gr_pk_max:
            raise ConfigurationError(
                f"gr_pk_init ({self.gr_pk_init}) outside bounds "
                f"[{self.gr_pk_min}, {self.gr_pk_max}]")


@dataclass
class LayerActivity:
    """Spike counts of the most recent network step, for logging."""

    mf: int = 0
    gr: int = 0
    pk: int = 0
    io: int = 0
    dcn: int = 0


@dataclass
class CerebellarNetwork:
    """The wired network plus its plastic state and spike history."""

    cfg: CerebellarConfig
    mf: NeuronPopulation
    gr: NeuronPopulation
    pk: NeuronPopulation
    io: NeuronPopulation
    dcn: NeuronPopulation
    mf_gr: SynapseMatrix
    gr_pk: SynapseMatrix
    pk_dcn: SynapseMatrix
    mf_dcn: SynapseMatrix
    io_to_pk: np.ndarray
    hist: GrSpikeHistory
    agonist: np.ndarray      # index partition shared by pk/io/dcn
    antagonist: np.ndarray
    t: float = 0.0           # network clock, ms
    learning_enabled: bool = True
    last_activity: LayerActivity = field(default_factory=LayerActivity)


def build_network(cfg: CerebellarConfig) -> CerebellarNetwork:
    """Construct the wired network; a pure function of the configuration.

    The same seed always yields byte-identical weight matrices. Mossy to
    granule wiring is drawn per granule cell from its group; everything
    else is deterministic structure (full gr->pk, identity pk->dcn and
    io->pk pairings, uniform mossy collaterals onto the nuclei).
    """
    rng = np.random.default_rng(cfg.rng_seed)

    mf_per_group = cfg.n_mf // cfg.mf_groups
    gr_per_group = cfg.n_gr // cfg.mf_groups
    mf_gr_mask = np.zeros((cfg.n_mf, cfg.n_gr), dtype=bool)
    for g in range(cfg.mf_groups):
        base = g * mf_per_group
        for j in range(g * gr_per_group, (g + 1) * gr_per_group):
            pre = base + rng.choice(mf_per_group, size=cfg.gr_fan_in, replace=False)
            mf_gr_mask[pre, j] = True

    half = cfg.n_pk // 2
    identity = np.eye(cfg.n_pk, dtype=bool)

    return CerebellarNetwork(
        cfg=cfg,
        mf=NeuronPopulation(cfg.n_mf, cfg.mf_lif),
        gr=NeuronPopulation(cfg.n_gr, cfg.gr_lif),
        pk=NeuronPopulation(cfg.n_pk, cfg.pk_lif),
        io=NeuronPopulation(cfg.n_io, cfg.io_lif),
        dcn=NeuronPopulation(cfg.n_dcn, cfg.dcn_lif),
        mf_gr=uniform_synapse(cfg.n_mf, cfg.n_gr, cfg.w_mf_gr, mask=mf_gr_mask),
        gr_pk=SynapseMatrix(
            n_pre=cfg.n_gr, n_post=cfg.n_pk,
            w=np.full((cfg.n_gr, cfg.n_pk), cfg.gr_pk_init),
            mask=np.ones((cfg.n_gr, cfg.n_pk), dtype=bool),
            sign=1, w_min=cfg.gr_pk_min, w_max=cfg.gr_pk_max, plastic=True),
        pk_dcn=uniform_synapse(cfg.n_pk, cfg.n_dcn, cfg.w_pk_dcn,
                               mask=identity, sign=-1),
        mf_dcn=uniform_synapse(cfg.n_mf, cfg.n_dcn, cfg.w_mf_dcn),
        io_to_pk=np.arange(cfg.n_io),
        hist=GrSpikeHistory(cfg.stdp.window),
        agonist=np.arange(0, half),
        antagonist=np.arange(half, cfg.n_pk),
    )


def _channel_rates(signal, half_range, n, peak, width_factor):
    """Gaussian receptive-field rates over evenly spaced centers.

    Inputs beyond the outermost centers clamp to them, so the edge
    neuron saturates at its peak response instead of fading out.
    """
    centers = np.linspace(-half_range, half_range, n)
    spacing = centers[1] - centers[0]
    sigma = width_factor * spacing
    s = min(max(signal, centers[0]), centers[-1])
    return peak * np.exp(-((s - centers) ** 2) / (2.0 * sigma * sigma))


def mossy_rate_profile(theta_des, omega_des, cfg: CerebellarConfig) -> np.ndarray:
    """Target firing rates over the mossy layer for one reference sample."""
    half = cfg.n_mf // 2
    angle = _channel_rates(theta_des, cfg.mf_angle_range, half,
                           cfg.mf_peak_rate, cfg.rf_width_factor)
    velocity = _channel_rates(omega_des, cfg.mf_velocity_range, half,
                              cfg.mf_peak_rate, cfg.rf_width_factor)
    return np.concatenate([angle, velocity])


def encode_mossy(theta_des, omega_des, cfg: CerebellarConfig, phase,
                 dt, rng=None, t_ms=float("nan")) -> SpikeVector:
    """Encode the desired angle and velocity into mossy spikes.

    The layer splits half/half into an angle channel and a velocity
    channel of Gaussian receptive fields. ``phase`` holds the per-neuron
    encoder accumulators and is advanced in place.
    """
    if not (np.isfinite(theta_des) and np.isfinite(omega_des)):
        raise ContractViolationError("mossy encoder inputs must be finite")
    rates = mossy_rate_profile(theta_des, omega_des, cfg)
    fired = encode_rate_bank(rates, phase, dt, rng)
    return SpikeVector(fired=fired, t=t_ms)


def encode_io_error(error, cfg: CerebellarConfig, phase, dt, rng=None,
                    t_ms=float("nan")) -> SpikeVector:
    """Encode the signed tracking error into olivary teaching spikes.

    Positive error drives the agonist half, negative error the antagonist
    half, at a rate ramping linearly to io_max_rate at the saturation
    error; the opposite half stays silent.
    """
    if not np.isfinite(error):
        raise ContractViolationError("error must be finite")
    half = cfg.n_io // 2
    rate = cfg.io_max_rate * min(abs(error) / cfg.io_error_saturation, 1.0)
    rates = np.zeros(cfg.n_io)
    if error > 0.0:
        rates[:half] = rate
    elif error < 0.0:
        rates[half:] = rate
    fired = encode_rate_bank(rates, phase, dt, rng)
    return SpikeVector(fired=fired, t=t_ms)


def network_step(net: CerebellarNetwork, mf_spikes: SpikeVector,
                 io_spikes: SpikeVector, dt: float) -> SpikeVector:
    """One synchronous sweep through the network, plasticity included.

    Mossy spikes drive the granule layer; granule spikes are recorded
    into the history and drive the Purkinje layer; the nuclei integrate
    Purkinje inhibition against direct mossy excitation. Potentiation
    then applies for this step's granule spikes and depression for this
    step's olivary spikes against the recorded history.
    """
    if mf_spikes.fired.shape != (net.cfg.n_mf,):
        raise ContractViolationError("mossy spike vector has wrong length")
    if io_spikes.fired.shape != (net.cfg.n_io,):
        raise ContractViolationError("olivary spike vector has wrong length")

    gr_spikes = lif_step(net.gr, propagate(mf_spikes, net.mf_gr), dt)
    net.t += dt
    record_gr_spikes(net.hist, gr_spikes, net.t)

    pk_spikes = lif_step(net.pk, propagate(gr_spikes, net.gr_pk), dt)
    i_dcn = propagate(pk_spikes, net.pk_dcn) + propagate(mf_spikes, net.mf_dcn)
    dcn_spikes = lif_step(net.dcn, i_dcn, dt)

    if net.learning_enabled:
        ltp_update(net.gr_pk, gr_spikes, net.cfg.stdp)
        ltd_update(net.gr_pk, net.hist, io_spikes, net.t, net.cfg.stdp,
                   net.io_to_pk)

    net.last_activity = LayerActivity(
        mf=mf_spikes.count, gr=gr_spikes.count, pk=pk_spikes.count,
        io=io_spikes.count, dcn=dcn_spikes.count)
    return dcn_spikes


def decode_dcn(dcn_spikes: SpikeVector, rate_state, cfg: CerebellarConfig,
               dt: float) -> float:
    """Update the per-neuron rate filter and return the motor command.

    The command is dcn_gain times the difference between the mean
    filtered agonist rate and the mean filtered antagonist rate, so equal
    activity in both halves decodes to zero.
    """
    if dcn_spikes.fired.shape != rate_state.shape:
        raise ContractViolationError("rate-filter state has wrong length")
    decode_rate_bank(rate_state, dcn_spikes.fired, cfg.tau_out, dt)
    half = cfg.n_dcn // 2
    diff = float(np.mean(rate_state[:half]) - np.mean(rate_state[half:]))
    # + 0.0 normalizes -0.0 so a zero gain decodes to a bitwise-zero command
    return cfg.dcn_gain * diff + 0.0


def weight_snapshot(net: CerebellarNetwork) -> np.ndarray:
    """Copy of the plastic granule-to-Purkinje weight matrix."""
    return net.gr_pk.w.copy()
