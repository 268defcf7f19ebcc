"""Experiment configuration: defaults, validation and TOML parsing.

A configuration file is TOML with one table per subsystem; every key is
optional and defaults to the values baked into the dataclasses, so an
empty file is a complete default experiment. Unknown keys anywhere are
rejected with the offending section and key named.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cerebellum import CerebellarConfig
from .control import ControlConfig, ControlMode, PdGains
from .errors import ConfigurationError
from .plant import ArmParams, PamParams, PneumaticParams
from .plasticity import StdpParams
from .snn import LifParams


@dataclass
class ReferenceConfig:
    """Desired-trajectory generator parameters."""

    shape: str = "sine"       # sine | step | hold
    amplitude: float = 0.35   # rad
    frequency: float = 0.5    # Hz (sine only)
    offset: float = 0.0       # rad
    t_step: float = 1.0       # s, switch time of the step shape

    def __post_init__(self):
        if self.shape not in ("sine", "step", "hold"):
            raise ConfigurationError(
                f"unknown reference shape {self.shape!r} "
                "(expected sine, step or hold)")
        if self.amplitude < 0.0:
            raise ConfigurationError("amplitude must be >= 0")
        if self.shape == "sine" and self.frequency <= 0.0:
            raise ConfigurationError("sine frequency must be > 0")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency


@dataclass
class DisturbanceConfig:
    """A rectangular external torque pulse on the joint."""

    time: float = 22.0    # s, pulse start
    torque: float = 0.05  # N*m
    width: float = 0.1    # s

    def __post_init__(self):
        if self.time < 0.0 or self.width <= 0.0:
            raise ConfigurationError("disturbance time/width must be valid")


@dataclass
class ExperimentConfig:
    """Everything one run needs; nested per-subsystem configurations."""

    seed: int = 42
    duration: float = 44.0            # s
    training_duration: float = 40.0   # s, evaluation window starts here
    n_substeps: int = 10              # plant substeps per control tick
    snapshot_period: float = 2.0      # s between plastic-weight snapshots
    freeze_after_training: bool = False  # ablation: stop plasticity at eval
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    disturbance: DisturbanceConfig | None = None
    network: CerebellarConfig = field(default_factory=CerebellarConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    arm: ArmParams = field(default_factory=ArmParams)
    pam: PamParams = field(default_factory=PamParams)
    pneumatic: PneumaticParams = field(default_factory=PneumaticParams)

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ConfigurationError("duration must be > 0")
        if not 0.0 <= self.training_duration <= self.duration:
            raise ConfigurationError(
                f"training_duration ({self.training_duration}) must lie in "
                f"[0, duration={self.duration}]")
        if self.n_substeps < 1:
            raise ConfigurationError("n_substeps must be >= 1")
        if self.snapshot_period <= 0.0:
            raise ConfigurationError("snapshot_period must be > 0")
        if self.reference.amplitude > self.arm.theta_max:
            raise ConfigurationError(
                f"reference amplitude {self.reference.amplitude} exceeds "
                f"theta_max {self.arm.theta_max}")
        if self.control.p_base >= self.pneumatic.p_gauge_max:
            raise ConfigurationError(
                f"p_base {self.control.p_base} must lie below the gauge "
                f"supply limit {self.pneumatic.p_gauge_max}")
        self.arm.validate_against(self.pam)
        # one seed rules the whole experiment
        self.network = dataclasses.replace(self.network, rng_seed=self.seed)

    @property
    def n_ticks(self) -> int:
        return round(self.duration * 1000.0 / self.control.dt_control)

    def with_mode(self, mode: ControlMode) -> "ExperimentConfig":
        """Deep copy of this configuration with the control mode replaced."""
        cfg = copy.deepcopy(self)
        cfg.control.mode = ControlMode(mode)
        return cfg


# config-file table -> (dataclass, ExperimentConfig attribute path)
_TABLES = {
    "reference": (ReferenceConfig, "reference"),
    "disturbance": (DisturbanceConfig, "disturbance"),
    "network": (CerebellarConfig, "network"),
    "stdp": (StdpParams, ("network", "stdp")),
    "control": (ControlConfig, "control"),
    "arm": (ArmParams, "arm"),
    "pam": (PamParams, "pam"),
    "pneumatic": (PneumaticParams, "pneumatic"),
}
_LIF_LAYERS = ("mf", "gr", "pk", "io", "dcn")
_TOP_LEVEL = ("seed", "duration", "training_duration", "n_substeps",
              "snapshot_period", "freeze_after_training")


def _build_dataclass(cls, table, section):
    """Instantiate ``cls`` from a TOML table, rejecting unknown keys."""
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(table) - known
    if unknown:
        raise ConfigurationError(
            f"unknown key {sorted(unknown)[0]!r} in section [{section}]")
    try:
        return cls(**table)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid value in section [{section}]: {exc}")


def _control_from_table(table):
    table = dict(table)
    gains = PdGains(kp=float(table.pop("kp", PdGains.kp)),
                    kd=float(table.pop("kd", PdGains.kd)))
    known = {f.name for f in dataclasses.fields(ControlConfig)} - {"gains"}
    unknown = set(table) - known
    if unknown:
        raise ConfigurationError(
            f"unknown key {sorted(unknown)[0]!r} in section [control]")
    if "mode" in table:
        try:
            table["mode"] = ControlMode(table["mode"])
        except ValueError:
            raise ConfigurationError(
                f"unknown control mode {table['mode']!r} (expected "
                f"{', '.join(m.value for m in ControlMode)})")
    return ControlConfig(gains=gains, **table)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a parsed TOML mapping."""
    data = copy.deepcopy(data)
    kwargs = {}
    for key in _TOP_LEVEL:
        if key in data:
            kwargs[key] = data.pop(key)

    lif_tables = data.pop("lif", {})
    if not isinstance(lif_tables, dict):
        raise ConfigurationError("[lif] must be a table of per-layer tables")
    unknown_layers = set(lif_tables) - set(_LIF_LAYERS)
    if unknown_layers:
        raise ConfigurationError(
            f"unknown layer {sorted(unknown_layers)[0]!r} in [lif] "
            f"(expected one of {', '.join(_LIF_LAYERS)})")

    network_table = dict(data.pop("network", {}))
    stdp_table = data.pop("stdp", None)
    control_table = data.pop("control", None)

    section_values = {}
    for name, (cls, _) in _TABLES.items():
        if name in ("network", "stdp", "control"):
            continue
        if name in data:
            section_values[name] = _build_dataclass(cls, data.pop(name), name)

    if data:
        raise ConfigurationError(
            f"unknown top-level key {sorted(data)[0]!r} in config")

    if stdp_table is not None:
        network_table["stdp"] = _build_dataclass(StdpParams, stdp_table, "stdp")
    for layer in _LIF_LAYERS:
        if layer in lif_tables:
            network_table[f"{layer}_lif"] = _build_dataclass(
                LifParams, lif_tables[layer], f"lif.{layer}")
    if network_table:
        kwargs["network"] = _build_dataclass(
            CerebellarConfig, network_table, "network")
    if control_table is not None:
        kwargs["control"] = _control_from_table(control_table)
    for name, value in section_values.items():
        kwargs[_TABLES[name][1]] = value

    return ExperimentConfig(**kwargs)


def parse_config(path) -> ExperimentConfig:
    """Parse a TOML experiment configuration file.

    Missing file, malformed TOML and invariant violations each raise a
    distinct, message-bearing ConfigurationError.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}")
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}")
    return config_from_dict(data)
