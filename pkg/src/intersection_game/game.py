"""Two-vehicle subgame: payoff matrix, pure Nash equilibria and their resolution."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import GameParams
from .kinematics import OTHER, ConflictDistances, pair_interval
from .payoffs import (
    DriverProfile,
    acceleration_tendency,
    prospect_value,
    safety_advantage,
    speed_advantage,
    speed_payoff,
)


class Strategy(enum.IntEnum):
    ACC = 0
    DEC = 1
    AEB = 2

    @property
    def short(self) -> str:
        return "pnA"[self.value]


PAIRS = tuple(itertools.product((Strategy.ACC, Strategy.DEC), repeat=2))
DEC_DEC = (Strategy.DEC, Strategy.DEC)


@dataclass(frozen=True)
class Approach:
    """Kinematic snapshot of one vehicle relative to one conflict area."""

    speed: float
    accel: float
    dist: ConflictDistances


def nominal_accel(strategy: Strategy, params: GameParams) -> float:
    if strategy == Strategy.ACC:
        return params.acc_nominal
    if strategy == Strategy.DEC:
        return params.dec_nominal
    return params.a_aeb


@dataclass
class PayoffMatrix:
    """Payoff components for the four {Acc, Dec}^2 cells, indexed [host, other].

    Both players value the same residual interval, each through their own
    profile; speed payoffs and tendencies are per player. Keeping the
    components lets ``reweighted`` change the safety weightings without
    redoing the kinematics.
    """

    safety_host: np.ndarray
    safety_other: np.ndarray
    speed_host: np.ndarray
    speed_other: np.ndarray
    p_host: np.ndarray
    p_other: np.ndarray
    sigma_host: float
    sigma_other: float
    dt_now: float = 0.0
    right_side: str = OTHER
    dt_exp: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    @property
    def u_host(self) -> np.ndarray:
        s = self.sigma_host
        return self.p_host * (s * self.safety_host + (1 - s) * self.speed_host)

    @property
    def u_other(self) -> np.ndarray:
        s = self.sigma_other
        return self.p_other * (s * self.safety_other + (1 - s) * self.speed_other)

    def reweighted(self, sigma_host: float, sigma_other: float) -> "PayoffMatrix":
        return PayoffMatrix(self.safety_host, self.safety_other, self.speed_host,
                            self.speed_other, self.p_host, self.p_other, sigma_host,
                            sigma_other, self.dt_now, self.right_side, self.dt_exp)

    def entry(self, pair) -> tuple:
        i, j = int(pair[0]), int(pair[1])
        return float(self.u_host[i, j]), float(self.u_other[i, j])


def _tendencies(t_host: float, t_other: float, hp: DriverProfile, op: DriverProfile):
    return acceleration_tendency(t_host, t_other, hp), acceleration_tendency(t_other, t_host, op)


def cell_payoffs(host: Approach, other: Approach, a_host: float, a_other: float,
                 hp: DriverProfile, op: DriverProfile, params: GameParams,
                 dt_now: float, now_times, right_side: str = OTHER):
    """One cell: (dt_exp, f_host, f_other, g_host, g_other, p_host, p_other)."""
    dt_exp, th, to, _ = pair_interval(host.speed, a_host, host.dist, other.speed, a_other,
                                      other.dist, right_side, params.t_max, params.dt_max,
                                      params.exp_hold)
    f_h = prospect_value(safety_advantage(dt_exp, dt_now, hp), hp)
    f_o = prospect_value(safety_advantage(dt_exp, dt_now, op), op)
    g_h = speed_payoff(speed_advantage(host.speed, a_host, params.T, hp), hp)
    g_o = speed_payoff(speed_advantage(other.speed, a_other, params.T, op), op)
    if params.tendency_source == "expected":
        p_h, p_o = _tendencies(th.arrival, to.arrival, hp, op)
    else:
        p_h, p_o = _tendencies(now_times[0], now_times[1], hp, op)
    return dt_exp, f_h, f_o, g_h, g_o, p_h, p_o


def strategy_grid(strategy: Strategy, params: GameParams, speed: float = 0.0) -> tuple:
    """Accelerations realizing a strategy, speed-capped on the Acc side."""
    if strategy == Strategy.ACC:
        grid = tuple(a for a in params.acc_grid if a == 0.0 or speed + a * params.T <= params.v_max)
        return grid or (0.0,)
    if strategy == Strategy.DEC:
        return tuple(params.dec_grid)
    return (params.a_aeb,)


def _own_utility(cell, profile: DriverProfile, mine: int) -> float:
    f, g, p = cell[1 + mine], cell[3 + mine], cell[5 + mine]
    s = profile.sigma
    return p * (s * f + (1 - s) * g)


def realized_accels(host: Approach, other: Approach, sh: Strategy, so: Strategy,
                    hp: DriverProfile, op: DriverProfile, params: GameParams,
                    dt_now: float, now_times, right_side: str = OTHER) -> tuple:
    """Accelerations standing in for the pair (sh, so) in the matrix."""
    a_h, a_o = nominal_accel(sh, params), nominal_accel(so, params)
    if params.realize == "nominal":
        return a_h, a_o

    def best(grid, score):
        top, top_u = None, -np.inf
        for a in sorted(grid, key=abs):
            u = score(a)
            if u > top_u + 1e-12:
                top, top_u = a, u
        return top

    bh = best(strategy_grid(sh, params, host.speed), lambda a: _own_utility(
        cell_payoffs(host, other, a, a_o, hp, op, params, dt_now, now_times, right_side), hp, 0))
    bo = best(strategy_grid(so, params, other.speed), lambda a: _own_utility(
        cell_payoffs(host, other, a_h, a, hp, op, params, dt_now, now_times, right_side), op, 1))
    return bh, bo


def current_interval(host: Approach, other: Approach, params: GameParams, right_side: str = OTHER):
    dt, th, to, early = pair_interval(host.speed, host.accel, host.dist, other.speed,
                                      other.accel, other.dist, right_side,
                                      params.t_max, params.dt_max)
    return dt, (th.arrival, to.arrival), early


def build_matrix(host: Approach, other: Approach, host_profile: DriverProfile,
                 other_profile: DriverProfile, params: GameParams,
                 right_side: str = OTHER) -> PayoffMatrix:
    dt_now, now_times, _ = current_interval(host, other, params, right_side)
    f_h = np.empty((2, 2))
    f_o = np.empty((2, 2))
    g_h = np.empty((2, 2))
    g_o = np.empty((2, 2))
    p_h = np.empty((2, 2))
    p_o = np.empty((2, 2))
    dt_exp = np.empty((2, 2))
    for sh, so in PAIRS:
        a_h, a_o = realized_accels(host, other, sh, so, host_profile, other_profile, params,
                                   dt_now, now_times, right_side)
        cell = cell_payoffs(host, other, a_h, a_o, host_profile, other_profile, params,
                            dt_now, now_times, right_side)
        for arr, v in zip((dt_exp, f_h, f_o, g_h, g_o, p_h, p_o), cell):
            arr[sh, so] = v
    return PayoffMatrix(f_h, f_o, g_h, g_o, p_h, p_o, host_profile.sigma, other_profile.sigma,
                        dt_now, right_side, dt_exp)


def pure_nash(u_host: np.ndarray, u_other: np.ndarray) -> list:
    """All pure strategy pairs where no player gains by deviating alone (weak inequality)."""
    eq = []
    for i, j in PAIRS:
        if u_host[i, j] >= u_host[1 - i, j] and u_other[i, j] >= u_other[i, 1 - j]:
            eq.append((i, j))
    return eq


class Case(str, enum.Enum):
    UNIQUE = "Unique"
    ESCALATED = "Escalated"
    MULTIPLE = "Multiple"


@dataclass
class GameResolution:
    chosen: tuple
    case_id: Case
    escalation_steps: int
    equilibria_found: list
    fallback: bool = False
    sigma_host: float = 0.0
    sigma_other: float = 0.0


def _tie_order(pair, right_side: str) -> tuple:
    # safety first: more decelerations win; then the right-of-way holder goes
    n_dec = int(pair[0] == Strategy.DEC) + int(pair[1] == Strategy.DEC)
    if right_side == OTHER:
        yields = int(pair[0] == Strategy.DEC)
    else:
        yields = int(pair[1] == Strategy.DEC)
    return (n_dec, yields)


def _pick_multiple(matrix: PayoffMatrix, eqs: list, last) -> tuple:
    if last is not None and tuple(last) in eqs:
        return tuple(last)
    total = matrix.u_host + matrix.u_other
    best = max(total[e] for e in eqs)
    tied = [e for e in eqs if total[e] >= best - 1e-12 * max(1.0, abs(best))]
    return max(tied, key=lambda e: _tie_order(e, matrix.right_side))


def resolve(matrix: PayoffMatrix, last=None, params: GameParams = GameParams()) -> GameResolution:
    """Pick one strategy pair from the matrix.

    One equilibrium is taken as is. With none, both safety weightings are
    raised step by step and the game replayed; if that never yields an
    equilibrium both vehicles decelerate. With several, the pair played last
    subgame is kept when possible, otherwise the largest joint payoff wins.
    """
    sh, so = matrix.sigma_host, matrix.sigma_other
    m = matrix
    steps = 0
    eqs = pure_nash(m.u_host, m.u_other)
    while not eqs and steps < params.max_escalations:
        steps += 1
        sh = min(sh + params.sigma_step, params.sigma_cap)
        so = min(so + params.sigma_step, params.sigma_cap)
        m = matrix.reweighted(sh, so)
        eqs = pure_nash(m.u_host, m.u_other)
    eqs_s = [(Strategy(i), Strategy(j)) for i, j in eqs]
    if not eqs:
        return GameResolution(DEC_DEC, Case.ESCALATED, steps, [], True, sh, so)
    if len(eqs) == 1:
        case = Case.ESCALATED if steps else Case.UNIQUE
        return GameResolution(eqs_s[0], case, steps, eqs_s, False, sh, so)
    i, j = _pick_multiple(m, eqs, last)
    case = Case.ESCALATED if steps else Case.MULTIPLE
    return GameResolution((Strategy(i), Strategy(j)), case, steps, eqs_s, False, sh, so)


def update_style(sigma_est: float, a_observed: float, a_equilibrium: float, k_sigma: float,
                 lo: float = 0.05, hi: float = 0.95) -> float:
    """Feedback correction of an opponent's estimated safety weighting."""
    return min(max(sigma_est - k_sigma * (a_observed - a_equilibrium), lo), hi)
