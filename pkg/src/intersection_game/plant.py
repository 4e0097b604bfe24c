"""Point-mass longitudinal vehicle with a first-order acceleration lag.

Stands in for a full vehicle-dynamics model: the commanded acceleration is
tracked ideally after the lag, so steady-state acceleration equals the target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .config import GameParams
from .coordinator import PathIntent
from .game import Approach, Strategy, cell_payoffs, current_interval
from .kinematics import OTHER, ConflictDistances
from .payoffs import DriverProfile

TAU = 0.5


@dataclass
class VehicleAgent:
    id: str
    speed: float
    accel: float                    # filtered (actual) acceleration
    pos: float                      # head path coordinate, m past the stopline
    intent: PathIntent
    profile: DriverProfile
    length: float = 4.5
    width: float = 1.8
    a_target: float = 0.0
    a_min: float = -4.0
    a_max: float = 2.0
    a_aeb: float = -8.0
    strategy_last: Optional[Strategy] = None
    aeb: bool = False
    sigma_est: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"{self.id}: negative speed {self.speed}")

    def near(self, s_near: float) -> float:
        return s_near - self.pos


def step(agent: VehicleAgent, dt: float, tau: float = TAU) -> VehicleAgent:
    """Advance one integration step in place (and return the agent)."""
    if agent.aeb:
        agent.accel = agent.a_aeb
    else:
        # exact zero-order-hold discretisation of 1/(tau s + 1)
        agent.accel += (agent.a_target - agent.accel) * (1.0 - math.exp(-dt / tau))
    v, a = agent.speed, agent.accel
    v_next = v + a * dt
    if v_next < 0.0:
        agent.pos += v * v / (-2.0 * a)
        agent.speed = 0.0
        if agent.a_target <= 0.0:
            agent.accel = 0.0
    else:
        agent.pos += v * dt + 0.5 * a * dt * dt
        agent.speed = v_next
    return agent


def approach(agent: VehicleAgent, s_near: float, other_width: float) -> Approach:
    dist = ConflictDistances(s_near - agent.pos, agent.length, other_width)
    return Approach(agent.speed, agent.accel, dist)


@dataclass(frozen=True)
class OpponentContext:
    """What the bottom level needs about one subproblem opponent."""

    host: Approach
    other: Approach
    other_profile: DriverProfile
    other_accel: float              # opponent held at its equilibrium acceleration
    right_side: str = OTHER
    tendency: float = None          # host tendency in the resolved cell; None re-predicts it


def candidate_grid(agent: VehicleAgent, strategy: Strategy, params: GameParams, T: float) -> list:
    if strategy == Strategy.ACC:
        grid = [a for a in params.acc_grid if a <= agent.a_max]
        capped = [a for a in grid if a == 0.0 or agent.speed + a * T <= params.v_max]
        return capped or [0.0]
    if strategy == Strategy.DEC:
        grid = [a for a in params.dec_grid if a >= agent.a_min]
        return grid or [agent.a_min]
    return [agent.a_aeb]


def strategy_to_accel(agent: VehicleAgent, strategy: Strategy, contexts: list,
                      params: GameParams) -> float:
    """Target acceleration inside the chosen strategy class.

    Each candidate is scored by the agent's own discounted payoff summed over
    its subproblems; ties go to the smallest |a|. The discount is the tendency
    of the resolved strategy pair unless a context leaves it unset.
    """
    if strategy == Strategy.AEB:
        return agent.a_aeb
    grid = candidate_grid(agent, strategy, params, params.T)
    if len(grid) == 1:
        return grid[0]
    if not contexts:
        # free road: full acceleration, or the least braking
        return max(grid)
    best, best_u = None, -math.inf
    for a in sorted(grid, key=abs):
        u = 0.0
        for c in contexts:
            dt_now, now_times, _ = current_interval(c.host, c.other, params, c.right_side)
            _, f_h, _, g_h, _, p_h, _ = cell_payoffs(c.host, c.other, a, c.other_accel,
                                                    agent.profile, c.other_profile, params,
                                                    dt_now, now_times, c.right_side)
            if c.tendency is not None:
                p_h = c.tendency
            s = agent.profile.sigma
            u += p_h * (s * f_h + (1 - s) * g_h)
        if u > best_u + 1e-12:
            best, best_u = a, u
    return best


def aeb_check(agent: VehicleAgent, ctx: OpponentContext, params: GameParams) -> bool:
    """Emergency braking: predicted collision, host is late, and braking can't wait."""
    near = ctx.host.dist.near
    if agent.speed * agent.speed / (-2.0 * agent.a_aeb) < near - params.aeb_margin:
        return False
    if near < 0.0:
        return False
    dt, _, early = current_interval(ctx.host, ctx.other, params, ctx.right_side)
    return dt < 0.0 and early == OTHER
