"""Independent oracles for the closed-form pieces.

The Nash oracle checks every unilateral deviation by brute force; the
kinematics oracle integrates each state forward at 1 ms and compares the
crossing instants against the closed forms. Both are deliberately written
without reusing the code they check.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numba
import numpy as np

from .kinematics import ConflictDistances, time_pair
from .payoffs import DriverProfile, acceleration_tendency, prospect_value, speed_payoff
from .game import pure_nash


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


# -- Nash ----------------------------------------------------------------------

def brute_force_nash(u1: np.ndarray, u2: np.ndarray) -> list:
    n, m = u1.shape
    out = []
    for i in range(n):
        for j in range(m):
            row_ok = all(u1[i, j] >= u1[k, j] for k in range(n))
            col_ok = all(u2[i, j] >= u2[i, k] for k in range(m))
            if row_ok and col_ok:
                out.append((i, j))
    return out


def random_games(n: int, seed: int) -> np.ndarray:
    """(n, 2, 2, 2) payoffs; a third are integer-valued so ties really occur."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n, 2, 2, 2))
    k = n // 3
    g[:k] = rng.integers(-2, 3, size=(k, 2, 2, 2))
    return g


def check_nash(n: int = 10_000, seed: int = 0) -> Check:
    t0 = time.perf_counter()
    games = random_games(n, seed)
    bad = sum(sorted(pure_nash(g[0], g[1])) != brute_force_nash(g[0], g[1]) for g in games)
    dt = time.perf_counter() - t0
    return Check("nash oracle", bad == 0, f"{bad} mismatches on {n} games in {dt:.2f}s", dt)


# -- kinematics ----------------------------------------------------------------

@numba.njit(cache=True)
def _integrate_crossing(v0, a, dist, dt, t_max):
    """First time the travelled distance reaches ``dist``, by 1 ms stepping.

    Within the crossing step the position is solved exactly (it is a
    quadratic in the step), so the oracle's error is just round-off and the
    stop detection, not the step length.
    """
    if dist <= 0.0:
        return 0.0
    x, v, t = 0.0, v0, 0.0
    while t < t_max:
        h = dt
        stops = a < 0.0 and v + a * h <= 0.0
        if stops:
            h = -v / a                       # comes to rest inside this step
        x_next = x + v * h + 0.5 * a * h * h
        if x_next >= dist:
            rem = dist - x
            disc = max(v * v + 2.0 * a * rem, 0.0)
            tau = 2.0 * rem / (v + math.sqrt(disc))      # root of the in-step quadratic
            return min(t + tau, t_max)
        if stops or (v <= 0.0 and a <= 0.0):
            return t_max
        x, t = x_next, t + h
        v = v + a * h
    return t_max


@numba.njit(cache=True)
def _oracle_batch(v, a, near, far, dt, t_max, out):
    for k in range(v.shape[0]):
        out[k, 0] = _integrate_crossing(v[k], a[k], near[k], dt, t_max)
        out[k, 1] = _integrate_crossing(v[k], a[k], far[k], dt, t_max)


def random_states(n: int, seed: int):
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.0, 30.0, n)
    v[rng.random(n) < 0.02] = 0.0             # some standing vehicles
    a = rng.uniform(-8.0, 2.0, n)
    a[rng.random(n) < 0.05] = 0.0
    near = rng.uniform(0.0, 200.0, n)
    length = rng.uniform(3.5, 6.0, n)
    width = rng.uniform(1.5, 2.5, n)
    return v, a, near, length, width


def check_kinematics(n: int = 100_000, seed: int = 0, t_max: float = 100.0,
                     tol: float = 1e-3) -> Check:
    t0 = time.perf_counter()
    v, a, near, length, width = random_states(n, seed)
    far = near + length + width
    ref = np.empty((n, 2))
    _oracle_batch(v, a, near, far, 1e-3, t_max, ref)
    got = np.empty((n, 2))
    for k in range(n):
        tp = time_pair(float(v[k]), float(a[k]), ConflictDistances(float(near[k]),
                       float(length[k]), float(width[k])), t_max)
        got[k] = tp.arrival, tp.passing
    err = np.abs(got - ref)
    sat = int(np.sum((ref >= t_max) != (got >= t_max)))
    worst = float(err.max())
    dt = time.perf_counter() - t0
    ok = worst <= tol and sat == 0
    n_sat = int(np.sum(ref >= t_max))
    return Check("kinematics oracle", ok,
                 f"max |err| {worst:.2e}s, {sat} saturation disagreements "
                 f"({n_sat} saturated times) on {n} states in {dt:.2f}s", dt)


# -- payoff unit values ----------------------------------------------------------

def payoff_unit_values(profile: DriverProfile = DriverProfile()) -> list:
    """(label, value, expected) triples for the anchor points of f, g and p."""
    ts = profile.t_safe
    t_other = 3.0
    return [
        ("f(t_safe)", prospect_value(ts, profile), 0.0),
        ("f(t_safe + 1)", prospect_value(ts + 1.0, profile), 1.0),
        ("f(t_safe - 1)", prospect_value(ts - 1.0, profile), -profile.lam),
        ("g(0)", speed_payoff(0.0, profile), 0.0),
        ("g(v_ref)", speed_payoff(profile.v_ref, profile), 0.84508),
        ("g(large)", speed_payoff(200.0 * profile.v_ref, profile), profile.K),
        ("p dead band", acceleration_tendency(t_other + 0.7, t_other, profile), profile.epsilon),
        ("p tied arrival", acceleration_tendency(t_other, t_other, profile), profile.epsilon),
    ]


def check_payoffs(tol: float = 1e-9) -> Check:
    rows = payoff_unit_values()
    bad = [(k, v, e) for k, v, e in rows if not abs(v - e) <= tol]
    detail = "all anchors exact" if not bad else "; ".join(f"{k}={v!r} (want {e})" for k, v, e in bad)
    return Check("payoff unit values", not bad, f"{len(rows)} anchors, {detail}")


def run_all(seed: int = 0) -> list:
    return [check_nash(seed=seed), check_kinematics(seed=seed), check_payoffs()]
