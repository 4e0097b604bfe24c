"""Scenario descriptions and the generators for the three experiment families."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..config import GameParams
from ..coordinator import IntersectionLayout
from ..payoffs import DriverProfile

KMH = 1 / 3.6
DISTURBANCE_SD = float(np.sqrt(0.001))


@dataclass(frozen=True)
class AgentSpec:
    """Initial condition of one vehicle.

    Position is given either as ``d0`` (head to the near edge of the first
    conflict rectangle it shares with anyone) or as ``tts`` (time to the
    stopline at the initial speed).
    """

    id: str
    arm: str
    speed: float
    accel: float = 0.0
    d0: Optional[float] = None
    tts: Optional[float] = None
    maneuver: str = "Straight"
    profile: DriverProfile = field(default_factory=DriverProfile)
    length: float = 4.5
    width: float = 1.8

    def __post_init__(self):
        if (self.d0 is None) == (self.tts is None):
            raise ValueError(f"agent {self.id}: give exactly one of d0 or tts")


@dataclass(frozen=True)
class ScenarioSpec:
    agents: tuple
    params: GameParams = field(default_factory=GameParams)
    dt: float = 1e-3
    seed: int = 0
    disturbance_sd: float = DISTURBANCE_SD
    layout: IntersectionLayout = field(default_factory=IntersectionLayout)
    # "limit": stop when the first vehicle reaches a conflict area
    # "full": run until every vehicle has left the box
    mode: str = "limit"
    timeout: float = 60.0
    sample_every: float = 0.05
    name: str = ""
    meta: tuple = ()        # (key, value) pairs carried into result rows

    def __post_init__(self):
        steps = self.params.T / self.dt
        if abs(steps - round(steps)) > 1e-6 or round(steps) < 1:
            raise ValueError(f"subgame duration {self.params.T} is not a multiple of dt {self.dt}")
        if self.mode not in ("limit", "full"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def T(self) -> float:
        return self.params.T


def two_vehicle(d_a: float, d_b: float, v_a: float, v_b: float, sigma_a: float = 0.6,
                sigma_b: float = 0.5, params: GameParams = None, seed: int = 0,
                base_profile: DriverProfile = None, **kw) -> ScenarioSpec:
    """Car A from the south, Car B from the east (B on A's right), both straight."""
    base = base_profile or DriverProfile()
    agents = (
        AgentSpec("A", "S", v_a, d0=d_a, profile=replace(base, sigma=sigma_a)),
        AgentSpec("B", "E", v_b, d0=d_b, profile=replace(base, sigma=sigma_b)),
    )
    return ScenarioSpec(agents, params or GameParams(), seed=seed, **kw)


def baseline(seed: int = 0, **kw) -> ScenarioSpec:
    return two_vehicle(60.0, 60.0, 40 * KMH, 40 * KMH, seed=seed, name="baseline", **kw)


TABLE1_SPEEDS_KMH = (40, 50, 60, 70, 80, 90, 100)
TABLE1_DISTANCES = (60.0, 50.0)
TABLE1_REFERENCE = {
    (60.0, 40): (4.630, 15.08), (60.0, 50): (3.893, 12.89), (60.0, 60): (3.109, 15.53),
    (60.0, 70): (2.769, 11.63), (60.0, 80): (2.477, 9.349), (60.0, 90): (2.239, 7.596),
    (60.0, 100): (2.043, 6.136),
    (50.0, 40): (3.551, 10.39), (50.0, 50): (3.061, 10.45), (50.0, 60): (2.656, 10.76),
    (50.0, 70): (2.358, 7.734), (50.0, 80): (2.101, 6.168), (50.0, 90): (1.893, 5.76),
    (50.0, 100): (1.725, 3.422),
}


def gen_table1(seed: int = 0, params: GameParams = None, **kw) -> list:
    specs = []
    for setup, d in enumerate(TABLE1_DISTANCES, start=1):
        for v in TABLE1_SPEEDS_KMH:
            specs.append(two_vehicle(d, d, v * KMH, v * KMH, params=params, seed=seed,
                                     name=f"table1-setup{setup}-{v}kmh",
                                     meta=(("setup", setup), ("d0", d), ("v0_kmh", v)), **kw))
    return specs


FIG7_DB0 = tuple(range(40, 101, 10))
FIG7_X = tuple(range(-20, 21))


def gen_fig7(seed: int = 0, params: GameParams = None, **kw) -> list:
    specs = []
    for d_b in FIG7_DB0:
        for x in FIG7_X:
            specs.append(two_vehicle(d_b + x, d_b, 40 * KMH, 40 * KMH, params=params, seed=seed,
                                     name=f"fig7-dB{d_b}-x{x}",
                                     meta=(("d_b0", d_b), ("x", x), ("d_a0", d_b + x)), **kw))
    return specs


def gen_limit_grid(seed: int = 0, params: GameParams = None, **kw) -> list:
    return gen_table1(seed, params, **kw) + gen_fig7(seed, params, **kw)


UNIFORM_PARAMS = GameParams(T=1.0)
UNIFORM_FULL_COUNT = 82_000


def uniform_grid() -> np.ndarray:
    """(d_A0, V_A0, V_B0) rows of the full grid before the d_B0 constraint."""
    d_a = np.arange(40, 81, 1.0)
    v_a = np.round(np.arange(90, 131, 1) / 10, 1)
    dv = np.round(np.arange(-25, 26, 1) / 10, 1)
    rows = [(d, va, round(va + x, 1)) for d in d_a for va in v_a for x in dv]
    return np.array(rows)


def d_b0_band(d_a: float, v_a: float, v_b: float, floor: float = 10.0) -> tuple:
    lo = max((d_a / v_a - 0.5) * v_b, floor)
    hi = (d_a / v_a + 0.5) * v_b
    return lo, hi


def gen_uniform_cases(count: Optional[int] = 2000, seed: int = 0,
                      params: GameParams = UNIFORM_PARAMS, **kw) -> list:
    rng = np.random.default_rng(seed)
    grid = uniform_grid()
    if count is not None and count < len(grid):
        idx = np.sort(rng.choice(len(grid), size=count, replace=False))
        grid = grid[idx]
    specs = []
    for k, (d_a, v_a, v_b) in enumerate(grid):
        lo, hi = d_b0_band(d_a, v_a, v_b)
        d_b = float(rng.uniform(lo, hi))
        specs.append(two_vehicle(float(d_a), d_b, float(v_a), float(v_b), params=params,
                                 seed=int(rng.integers(2**63)), name=f"uniform-{k}",
                                 meta=(("d_a0", float(d_a)), ("v_a0", float(v_a)),
                                       ("v_b0", float(v_b)), ("d_b0", d_b)), **kw))
    return specs


FOUR_AV_ARMS = (("A", "S"), ("B", "E"), ("C", "N"), ("D", "W"))
WORKED_CASE = {"speed": (11.87, 13.58, 12.54, 10.50), "accel": (3.68, 2.35, 2.15, 0.33)}
TABLE2_REFERENCE = {
    0: (86.94, 7.0204, 2.54), 1: (89.14, 7.4016, 7.52), 2: (89.32, 7.5921, 13.76),
    3: (90.72, 7.7432, 19.37), 4: (92.7, 7.9094, 23.98), 5: (93.9, 8.1429, 27.32),
    6: (94.71, 8.3786, 30.2), 7: (95.83, 8.6686, 32.3), 8: (96.08, 8.9776, 34.01),
}


def four_av(speeds, accels, tts, seed: int = 0, params: GameParams = None,
            profile: DriverProfile = None, **kw) -> ScenarioSpec:
    profile = profile or DriverProfile()
    agents = tuple(AgentSpec(name, arm, float(v), accel=float(a), tts=float(s), profile=profile)
                   for (name, arm), v, a, s in zip(FOUR_AV_ARMS, speeds, accels, tts))
    kw.setdefault("mode", "full")
    return ScenarioSpec(agents, params or GameParams(), seed=seed, **kw)


def worked_four_av(seed: int = 0, **kw) -> ScenarioSpec:
    return four_av(WORKED_CASE["speed"], WORKED_CASE["accel"], (6.0,) * 4, seed=seed,
                   name="four-av-worked", **kw)


def gen_four_av_cases(mu: float, count: int = 1000, seed: int = 0,
                      params: GameParams = None, **kw) -> list:
    rng = np.random.default_rng([seed, int(round(mu * 1000))])
    specs = []
    for k in range(count):
        v = rng.uniform(10.0, 14.0, 4)
        a = rng.uniform(0.0, 4.0, 4)
        tts = 6.0 + mu * rng.uniform(0.0, 1.0, 4)
        specs.append(four_av(v, a, tts, seed=int(rng.integers(2**63)), params=params,
                             name=f"four-av-mu{mu:g}-{k}", meta=(("mu", mu),), **kw))
    return specs
