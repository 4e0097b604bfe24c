"""Constant-acceleration arrival/passing predictions for a conflict area.

All times are seconds from "now", all distances metres along the vehicle's
own path. ``T_MAX`` is the saturating sentinel returned when a vehicle never
reaches the requested distance (it stops short, or is standing still).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

T_MAX = 100.0
DT_MAX = 100.0

HOST = "host"
OTHER = "other"


@dataclass(frozen=True)
class MotionState:
    speed: float
    accel: float = 0.0
    pos: float = 0.0

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")


@dataclass(frozen=True)
class ConflictDistances:
    """Head-to-near-edge and tail-to-far-edge distances to one conflict area."""

    near: float
    own_length: float
    other_width: float

    @property
    def far(self) -> float:
        return self.near + self.own_length + self.other_width

    @property
    def passed(self) -> bool:
        return self.far <= 0.0


@dataclass(frozen=True)
class TimePair:
    arrival: float
    passing: float


def arrival_time(speed: float, accel: float, distance: float, t_max: float = T_MAX) -> float:
    """Smallest t >= 0 with speed*t + accel*t**2/2 == distance, or ``t_max``."""
    assert speed >= 0.0, speed
    if distance <= 0.0:
        return 0.0
    disc = speed * speed + 2.0 * accel * distance
    if disc < 0.0:
        # stops before covering the distance
        return t_max
    denom = speed + math.sqrt(disc)
    if denom <= 0.0:
        return t_max
    # 2d / (V + sqrt(V^2 + 2ad)) is the rationalised root, stable for both signs of a
    # and exact at a = 0
    return min(2.0 * distance / denom, t_max)


def stepped_arrival_time(speed: float, accel: float, distance: float, hold: float,
                         t_max: float = T_MAX) -> float:
    """Arrival when ``accel`` lasts ``hold`` seconds and the speed is then kept."""
    if distance <= 0.0:
        return 0.0
    if accel >= 0.0:
        s1, v1, t1 = speed * hold + 0.5 * accel * hold * hold, speed + accel * hold, hold
    else:
        t1 = min(hold, speed / -accel)
        s1, v1 = speed * t1 + 0.5 * accel * t1 * t1, speed + accel * t1
    if distance <= s1:
        return arrival_time(speed, accel, distance, t_max)
    if v1 <= 0.0:
        return t_max
    return min(t1 + (distance - s1) / v1, t_max)


def _arrival(speed, accel, distance, t_max, hold):
    if hold is None:
        return arrival_time(speed, accel, distance, t_max)
    return stepped_arrival_time(speed, accel, distance, hold, t_max)


def passing_time(speed: float, accel: float, dist: ConflictDistances, t_max: float = T_MAX,
                 hold: float = None) -> float:
    return _arrival(speed, accel, dist.far, t_max, hold)


def time_pair(speed: float, accel: float, dist: ConflictDistances, t_max: float = T_MAX,
              hold: float = None) -> TimePair:
    """Arrival and passing times; with ``hold`` the acceleration stops after that long."""
    return TimePair(_arrival(speed, accel, dist.near, t_max, hold),
                    passing_time(speed, accel, dist, t_max, hold))


def priority_order(t_host: float, t_other: float, right_side: str) -> str:
    """Return which participant (``HOST``/``OTHER``) reaches the area first.

    Exact ties go to the participant on the right side.
    """
    if t_host < t_other:
        return HOST
    if t_other < t_host:
        return OTHER
    return right_side


def residual_interval(host: TimePair, other: TimePair, host_is_late: bool,
                      t_max: float = T_MAX, dt_max: float = DT_MAX) -> float:
    """Late vehicle's arrival minus early vehicle's passing, capped at ``dt_max``.

    A late vehicle that never arrives saturates at ``dt_max``; an early vehicle
    that stalls inside the area is a plain (very negative) subtraction.
    """
    late, early = (host, other) if host_is_late else (other, host)
    if late.arrival >= t_max:
        return dt_max
    return min(late.arrival - early.passing, dt_max)


def pair_interval(host_speed: float, host_accel: float, host_dist: ConflictDistances,
                  other_speed: float, other_accel: float, other_dist: ConflictDistances,
                  right_side: str, t_max: float = T_MAX, dt_max: float = DT_MAX,
                  hold: float = None):
    """Residual interval for two approaching vehicles.

    Returns ``(dt, host_times, other_times, early)`` where ``early`` names the
    priority participant. A vehicle whose tail already cleared the area makes
    the interaction moot, so ``dt_max`` is reported.
    """
    th = time_pair(host_speed, host_accel, host_dist, t_max, hold)
    to = time_pair(other_speed, other_accel, other_dist, t_max, hold)
    early = priority_order(th.arrival, to.arrival, right_side)
    if host_dist.passed or other_dist.passed:
        return dt_max, th, to, early
    dt = residual_interval(th, to, host_is_late=(early == OTHER), t_max=t_max, dt_max=dt_max)
    return dt, th, to, early
