"""Spiking cerebellar feed-forward control of a pneumatic-muscle arm.

A deterministic simulation stack: a fixed-timestep LIF network with a
cerebellar topology and spike-driven plasticity acts as the feed-forward
half of a cascade controller around a one-joint arm pulled by an
antagonistic pair of McKibben muscles. The experiment harness trains the
network online on a reference trajectory and compares control strategies.
"""

from .cerebellum import CerebellarConfig, CerebellarNetwork, build_network
from .config import ExperimentConfig, parse_config
from .control import ControlConfig, ControlMode, PdGains
from .errors import (CerebarmError, ConfigurationError,
                     ContractViolationError, NumericalDivergenceError)
from .experiment import (Metrics, compare_strategies, compute_metrics,
                         run_experiment)
from .plant import ArmParams, PamParams, PlantState, PneumaticParams

__version__ = "0.1.0"

__all__ = [
    "ArmParams", "CerebarmError", "CerebellarConfig", "CerebellarNetwork",
    "ConfigurationError", "ContractViolationError", "ControlConfig",
    "ControlMode", "ExperimentConfig", "Metrics", "NumericalDivergenceError",
    "PamParams", "PdGains", "PlantState", "PneumaticParams",
    "build_network", "compare_strategies", "compute_metrics", "parse_config",
    "run_experiment", "__version__",
]
