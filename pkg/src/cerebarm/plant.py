"""Antagonistic pneumatic-muscle arm: braid force law, valve lag, integrator.

Two McKibben-style muscles pull a single rotating link in opposite
directions over a moment arm. The static force follows the braided-shell
model F = p * A * (a*(1-eps)^2 - b) with a = 3/tan^2(theta0) and
b = 1/sin^2(theta0), plus a linear contraction-rate damping term; force
is floored at zero because a muscle cannot push. Valves are first-order
lags toward supply or atmosphere, and the joint integrates with
semi-implicit Euler plus a hard stop at the angle limits.

All pressures here are gauge (Pa above atmosphere). Plant time is in
seconds; the neural side runs in milliseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ContractViolationError, NumericalDivergenceError


class ValveMode(str, Enum):
    FILL = "FILL"
    HOLD = "HOLD"
    VENT = "VENT"


@dataclass
class ValveCommand:
    """One valve mode per muscle for one control tick."""

    agonist: ValveMode
    antagonist: ValveMode


@dataclass
class PamParams:
    """Geometry and damping of one muscle (both muscles are identical)."""

    d0: float = 0.01                        # braid diameter at rest, m
    theta0: float = math.radians(23.0)      # initial braid angle, rad
    l0: float = 0.2                         # rest length, m
    eps_pre: float = 0.05                   # pretension contraction
    f_damp: float = 80.0                    # contraction-rate damping, N*s/m

    def __post_init__(self):
        if not 0.0 < self.theta0 < math.pi / 2:
            raise ContractViolationError(
                f"theta0 must lie in (0, pi/2), got {self.theta0}")
        if self.d0 <= 0.0 or self.l0 <= 0.0:
            raise ContractViolationError("d0 and l0 must be positive")
        if self.f_damp < 0.0:
            raise ContractViolationError("f_damp must be >= 0")
        if not 0.0 <= self.eps_pre < self.eps_max:
            raise ContractViolationError(
                f"eps_pre ({self.eps_pre}) must lie in [0, eps_max="
                f"{self.eps_max:.4f})")

    @property
    def braid_a(self) -> float:
        return 3.0 / math.tan(self.theta0) ** 2

    @property
    def braid_b(self) -> float:
        return 1.0 / math.sin(self.theta0) ** 2

    @property
    def area(self) -> float:
        return math.pi * self.d0 ** 2 / 4.0

    @property
    def eps_max(self) -> float:
        """Contraction at which the static force reaches zero."""
        return 1.0 - math.sqrt(self.braid_b / self.braid_a)


@dataclass
class ArmParams:
    """Rigid link on a revolute joint, gravity acting on its center of mass."""

    inertia: float = 0.01        # kg*m^2
    moment_arm: float = 0.02     # m, muscle cable lever
    mass: float = 0.5            # kg
    com: float = 0.15            # m, center-of-mass distance
    viscous_friction: float = 0.05  # N*m*s
    gravity: float = 9.81        # m/s^2
    theta_max: float = 0.6       # rad, symmetric hard stop

    def __post_init__(self):
        for name in ("inertia", "moment_arm", "mass", "com",
                     "viscous_friction", "gravity", "theta_max"):
            if getattr(self, name) <= 0.0:
                raise ContractViolationError(f"{name} must be positive")

    def validate_against(self, pam: PamParams):
        """Full deflection must keep both muscles inside the active region."""
        swing = self.moment_arm * self.theta_max / pam.l0
        if pam.eps_pre + swing >= pam.eps_max:
            raise ContractViolationError(
                f"theta_max {self.theta_max} drives contraction to "
                f"{pam.eps_pre + swing:.4f}, beyond eps_max {pam.eps_max:.4f}")


@dataclass
class PneumaticParams:
    """Supply/atmosphere pressures and first-order valve time constants."""

    p_atm: float = 101325.0      # Pa absolute
    p_supply: float = 601325.0   # Pa absolute (500 kPa gauge)
    tau_fill: float = 0.05       # s
    tau_vent: float = 0.05       # s

    def __post_init__(self):
        if self.p_supply <= self.p_atm:
            raise ContractViolationError(
                f"p_supply ({self.p_supply}) must exceed p_atm ({self.p_atm})")
        if self.tau_fill <= 0.0 or self.tau_vent <= 0.0:
            raise ContractViolationError("valve time constants must be positive")

    @property
    def p_gauge_max(self) -> float:
        return self.p_supply - self.p_atm


@dataclass
class PlantState:
    """Joint angle/velocity and the two gauge muscle pressures."""

    theta: float = 0.0   # rad
    omega: float = 0.0   # rad/s
    p_ag: float = 0.0    # Pa gauge
    p_ant: float = 0.0
    t: float = 0.0       # s


def muscle_contraction(theta, side, arm: ArmParams, pam: PamParams) -> float:
    """Contraction ratio of one muscle at joint angle theta.

    Linear cable-over-pulley geometry: the agonist shortens as theta
    grows, the antagonist lengthens by the same amount around the shared
    pretension.
    """
    if abs(theta) > arm.theta_max:
        raise ContractViolationError(
            f"theta {theta} outside +-theta_max {arm.theta_max}")
    swing = arm.moment_arm * theta / pam.l0
    if side == "agonist":
        return pam.eps_pre + swing
    if side == "antagonist":
        return pam.eps_pre - swing
    raise ContractViolationError(f"side must be agonist or antagonist, got {side!r}")


def pam_force(p, eps, pam: PamParams, eps_rate=0.0) -> float:
    """Muscle tension at gauge pressure p and contraction eps.

    Static braid force scaled by pressure, minus contraction-rate
    damping, floored at zero: a muscle can only pull.
    """
    if eps >= 1.0:
        raise ContractViolationError(f"contraction {eps} must be < 1")
    static = p * pam.area * (pam.braid_a * (1.0 - eps) ** 2 - pam.braid_b)
    return max(static - pam.f_damp * pam.l0 * eps_rate, 0.0)


def pressure_step(p, cmd: ValveMode, pneu: PneumaticParams, dt) -> float:
    """Exact first-order valve response over dt seconds."""
    if cmd == ValveMode.HOLD:
        return p
    if cmd == ValveMode.FILL:
        target, tau = pneu.p_gauge_max, pneu.tau_fill
    elif cmd == ValveMode.VENT:
        target, tau = 0.0, pneu.tau_vent
    else:
        raise ContractViolationError(f"unknown valve mode {cmd!r}")
    return target + (p - target) * math.exp(-dt / tau)


def plant_step(state: PlantState, cmd: ValveCommand, arm: ArmParams,
               pam: PamParams, pneu: PneumaticParams, dt_outer,
               n_substeps=10, tau_ext=0.0) -> PlantState:
    """Advance the plant one control tick with semi-implicit Euler substeps.

    The valve command is held for the whole tick. ``tau_ext`` is an
    external disturbance torque in N*m. Hitting the hard stop clamps the
    angle and zeroes the velocity. A non-finite state raises
    NumericalDivergenceError with the offending values attached.
    """
    if n_substeps < 1:
        raise ContractViolationError(f"n_substeps must be >= 1, got {n_substeps}")
    dt = dt_outer / n_substeps
    k = arm.moment_arm / pam.l0
    mgl = arm.mass * arm.gravity * arm.com

    th, om = state.theta, state.omega
    p_ag, p_ant = state.p_ag, state.p_ant
    for _ in range(n_substeps):
        p_ag = pressure_step(p_ag, cmd.agonist, pneu, dt)
        p_ant = pressure_step(p_ant, cmd.antagonist, pneu, dt)
        f_ag = pam_force(p_ag, pam.eps_pre + k * th, pam, k * om)
        f_ant = pam_force(p_ant, pam.eps_pre - k * th, pam, -(k * om))
        torque = (arm.moment_arm * (f_ag - f_ant)
                  - mgl * math.sin(th)
                  - arm.viscous_friction * om
                  + tau_ext)
        om = om + (torque / arm.inertia) * dt
        th = th + om * dt
        if th > arm.theta_max:
            th, om = arm.theta_max, 0.0
        elif th < -arm.theta_max:
            th, om = -arm.theta_max, 0.0

    if not all(math.isfinite(x) for x in (th, om, p_ag, p_ant)):
        raise NumericalDivergenceError(
            "plant state diverged",
            diagnostics={"t": state.t, "theta": th, "omega": om,
                         "p_ag": p_ag, "p_ant": p_ant})
    return PlantState(theta=th, omega=om, p_ag=p_ag, p_ant=p_ant,
                      t=state.t + dt_outer)
