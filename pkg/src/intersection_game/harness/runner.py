"""Scenario batches over a process pool, merged back in scenario order."""
from __future__ import annotations

import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor

from .scenarios import ScenarioSpec
from .simulate import RunResult, run_scenario


def failed_result(spec: ScenarioSpec, error: str) -> RunResult:
    """Placeholder for a scenario whose simulation raised."""
    return RunResult(spec.name, False, False, False, {}, math.inf, math.inf, {}, (), False, {},
                     meta=spec.meta + (("error", error),))


def _run_one(args):
    spec, record = args
    try:
        return run_scenario(spec, record=record)
    except Exception as exc:                  # one bad scenario must not sink the batch
        last = traceback.format_exception_only(type(exc), exc)[-1].strip()
        return failed_result(spec, last)


def resolve_jobs(jobs=None) -> int:
    if jobs is None:
        jobs = int(os.environ.get("INTERSECTION_GAME_JOBS", "1"))
    return max(int(jobs), 1)


def run_batch(specs: list, jobs: int = 1, record: bool = False) -> list:
    """Run every spec; the result list is in spec order whatever ``jobs`` is."""
    work = [(s, record) for s in specs]
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(work) < 2:
        return [_run_one(w) for w in work]
    chunk = max(1, len(work) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, work, chunksize=chunk))


def batch_errors(results: list) -> list:
    return [(r.name, dict(r.meta)["error"]) for r in results if "error" in dict(r.meta)]
