"""Objective advantages and their subjective (prospect-style) payoffs."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class DriverProfile:
    sigma: float = 0.5          # safety weighting; speed weighting is 1 - sigma
    alpha: float = 0.88
    beta: float = 0.88
    lam: float = 2.25           # loss aversion
    t_safe: float = 1.5         # s, reference interval
    K: float = 1.142
    theta: float = 0.26
    v_ref: float = 1.0          # exponent normaliser for the speed payoff
    v_exp: float = 40 / 3.6     # m/s, recommended speed
    epsilon: float = 0.05
    w_t: float = 0.5
    w_v: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")
        if self.v_exp <= 0 or self.v_ref <= 0:
            raise ValueError("v_exp and v_ref must be positive")

    @property
    def delta(self) -> float:
        return 1.0 - self.sigma

    @property
    def w_vref(self) -> float:
        return 1.0 / self.v_exp

    def with_sigma(self, sigma: float) -> "DriverProfile":
        return replace(self, sigma=sigma)


@dataclass(frozen=True)
class StrategyPayoff:
    safety_adv: float
    speed_adv: float
    subjective_total: float
    tendency: float
    discounted: float


def safety_advantage(dt_exp: float, dt_now: float, profile: DriverProfile) -> float:
    return dt_exp + profile.w_t * (dt_exp - dt_now)


def speed_advantage(v_now: float, a_exp: float, T: float, profile: DriverProfile) -> float:
    v_next = v_now + T * a_exp
    return profile.w_vref * v_next + profile.w_v * (v_next - v_now)


def prospect_value(A_s: float, profile: DriverProfile) -> float:
    """Reference-dependent safety value: concave gains, steeper convex losses."""
    x = A_s - profile.t_safe
    if x >= 0.0:
        return x ** profile.alpha
    return -profile.lam * (-x) ** profile.beta


def speed_payoff(v_adv: float, profile: DriverProfile) -> float:
    return profile.K * (1.0 - profile.theta ** (v_adv / profile.v_ref))


def acceleration_tendency(t_self: float, t_other: float, profile: DriverProfile) -> float:
    """Probability-like inclination to accelerate given both arrival times.

    Earlier arrival raises the tendency in proportion to the lead; a vehicle
    trailing by at least 1.5 s regains it; anything in between sits at the floor.
    """
    eps = profile.epsilon
    if t_self <= t_other:
        if t_other <= 0.0:
            return eps
        return max((t_other - t_self) / t_other, eps)
    if t_self - t_other >= 1.5:
        if t_other <= 0.0:
            return 1.0
        return max(1.0 - math.exp(0.5 - 0.5 * t_self / t_other), eps)
    return eps


def total_payoff(A_s: float, v_adv: float, profile: DriverProfile) -> float:
    return profile.sigma * prospect_value(A_s, profile) + profile.delta * speed_payoff(v_adv, profile)


def strategy_payoff(A_s: float, v_adv: float, p: float, profile: DriverProfile) -> StrategyPayoff:
    U = total_payoff(A_s, v_adv, profile)
    return StrategyPayoff(A_s, v_adv, U, p, p * U)
