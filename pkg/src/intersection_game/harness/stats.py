"""Batch statistics: success rates, clearing-time efficiency, table rows."""
from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

from .simulate import SUCCESS_CLEARANCE

T_EIC0_BASE = 7.2037      # benchmark clearing time at mu = 0, s
T_EIC0_SLOPE = 0.8        # growth of the benchmark per unit of TTS bandwidth


def benchmark_clearing_time(mu: float) -> float:
    return T_EIC0_BASE + T_EIC0_SLOPE * mu


def _mean(xs) -> Optional[float]:
    xs = [x for x in xs if x is not None and math.isfinite(x)]
    return float(np.mean(xs)) if xs else None


def _r(x, nd=6):
    return None if x is None else round(float(x), nd)


def aggregate_stats(results: Iterable, mu: Optional[float] = None) -> dict:
    """Summary of a batch of RunResults.

    Rates are percentages. ``collision_rate_3m`` counts runs whose smallest
    clearance fell under the 3 m judgement limit, ``collision_rate_0m`` the
    ones that actually overlapped (negative clearance). With ``mu`` given the
    clearing-time efficiency against the constant-speed benchmark is added.
    """
    results = list(results)
    n = len(results)
    out = {"count": n, "successes": 0, "success_rate": None, "aeb_rate": None,
           "timeout_rate": None, "collision_rate_3m": None, "collision_rate_0m": None,
           "mean_min_clearance": None, "T_mIC": None, "mean_T_f": None}
    if mu is not None:
        out.update(mu=mu, T_eIC0=_r(benchmark_clearing_time(mu)), eta_TE=None)
    if not n:
        return out
    ok = [r for r in results if r.success]
    pct = lambda k: _r(100.0 * k / n)
    out.update(
        successes=len(ok),
        success_rate=pct(len(ok)),
        aeb_rate=pct(sum(r.aeb_triggered for r in results)),
        timeout_rate=pct(sum(r.timed_out for r in results)),
        collision_rate_3m=pct(sum(r.min_clearance < SUCCESS_CLEARANCE for r in results)),
        collision_rate_0m=pct(sum(r.min_clearance < 0.0 or r.collision for r in results)),
        mean_min_clearance=_r(_mean(r.min_clearance for r in results)),
        T_mIC=_r(_mean(r.T_IC for r in ok)),
        mean_T_f=_r(_mean(r.T_f for r in ok)),
    )
    if mu is not None and out["T_mIC"] is not None:
        t0 = benchmark_clearing_time(mu)
        out["eta_TE"] = _r(100.0 * (t0 - out["T_mIC"]) / t0)
    return out


TABLE2_COLUMNS = ("mu", "success_rate", "T_mIC", "T_eIC0", "eta_TE")


def table2_rows(groups: dict) -> list:
    """groups: mu -> list of RunResult. One row per mu in the Table 2 layout."""
    rows = []
    for mu in sorted(groups):
        s = aggregate_stats(groups[mu], mu=mu)
        rows.append({k: s[k] for k in TABLE2_COLUMNS})
    return rows


TABLE1_COLUMNS = ("setup", "d0", "v0_kmh", "T_f", "delta_d", "success", "ref_T_f", "ref_delta_d")


def table1_rows(results: list, reference: dict) -> list:
    rows = []
    for r in results:
        m = dict(r.meta)
        ref = reference.get((m["d0"], m["v0_kmh"]), (None, None))
        rows.append({"setup": m["setup"], "d0": m["d0"], "v0_kmh": m["v0_kmh"],
                     "T_f": _r(r.T_f), "delta_d": _r(r.min_clearance), "success": r.success,
                     "ref_T_f": ref[0], "ref_delta_d": ref[1]})
    return rows


def v_shape_minima(rows: list) -> dict:
    """d_b0 -> (x at the minimum clearance, minimum clearance) for Fig. 7 rows."""
    best = {}
    for row in rows:
        d, x, c = row["d_b0"], row["x"], row["min_clearance"]
        if c is None:
            continue
        if d not in best or c < best[d][1] or (c == best[d][1] and abs(x) < abs(best[d][0])):
            best[d] = (x, c)
    return dict(sorted(best.items()))
