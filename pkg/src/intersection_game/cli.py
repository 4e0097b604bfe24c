"""Command-line front end: single runs, experiment families, invariant checks."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from pathlib import Path

from .harness import scenarios as S
from .harness.io import ConfigError, ExperimentConfig, load_config, write_csv, write_json
from .harness.runner import batch_errors, resolve_jobs, run_batch
from .harness.simulate import run_scenario
from .harness.stats import aggregate_stats, table1_rows, table2_rows, v_shape_minima

log = logging.getLogger("intersection_game")

VERBS = ("run", "table1", "fig7", "uniform", "four-av", "validate")
ENV_JOBS = "INTERSECTION_GAME_JOBS"
ENV_OUT = "INTERSECTION_GAME_OUT"
DEFAULT_MU = (0.0, 4.0, 8.0)
FULL_MU = tuple(float(m) for m in range(9))
FULL_FOUR_AV_COUNT = 10_000


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intersection-game",
                                description="Game-theoretic unsignalized intersection simulator.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--config", help="YAML experiment/scenario file")
    p.add_argument("--out", help=f"output directory (env {ENV_OUT})")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--count", type=int, help="number of sampled cases (uniform, four-av)")
    p.add_argument("--mu", type=float, nargs="+", help="TTS bandwidths for four-av")
    p.add_argument("--jobs", type=int, help=f"worker processes (env {ENV_JOBS})")
    p.add_argument("--full", action="store_true", help="full reference-scale case counts")
    p.add_argument("--style-id", action="store_true", help="enable opponent style identification")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _settings(args, cfg: ExperimentConfig):
    """Flag, then environment, then config file, then built-in default."""
    out = args.out or os.environ.get(ENV_OUT) or cfg.out
    jobs = args.jobs if args.jobs is not None else (
        int(os.environ[ENV_JOBS]) if os.environ.get(ENV_JOBS) else cfg.jobs)
    seed = args.seed if args.seed is not None else cfg.seed
    params = cfg.params
    if args.style_id:
        params = dataclasses.replace(params, style_id=True)
    return (Path(out) if out else None), resolve_jobs(jobs), seed, params


def _provenance(cfg: ExperimentConfig, verb: str, seed: int, params, **extra) -> dict:
    d = cfg.resolved()
    d.update(family=verb, seed=seed, params=dataclasses.asdict(params), **extra)
    return d


def _report_errors(results) -> int:
    errs = batch_errors(results)
    for name, msg in errs:
        log.error("scenario %s failed: %s", name, msg)
    return 1 if errs else 0


def cmd_run(args, cfg, out, jobs, seed, params) -> int:
    if cfg.scenario is None:
        log.error("run needs --config with a scenario section")
        return 2
    spec = dataclasses.replace(cfg.scenario, params=params, seed=seed)
    r = run_scenario(spec, record=True)
    row = r.summary_row()
    for k, v in row.items():
        print(f"{k:>14}: {v}")
    for k, v in sorted(r.clearances.items()):
        print(f"{'clearance ' + k:>14}: {v:.4f}")
    if out:
        write_csv(out / "trajectory.csv", r.trajectory)
        write_csv(out / "decisions.csv", r.decisions)
        write_json(out / "run_summary.json", {"result": row, "clearances": r.clearances,
                                              "pass_times": r.pass_times,
                                              "first_decision": r.first_decision,
                                              "config": _provenance(cfg, "run", seed, params)})
    return 0 if r.success else 1


def cmd_table1(args, cfg, out, jobs, seed, params) -> int:
    specs = S.gen_table1(seed=seed, params=params)
    results = run_batch(specs, jobs)
    rows = table1_rows(results, S.TABLE1_REFERENCE)
    for row in rows:
        print(f"setup {row['setup']} {row['v0_kmh']:>3} km/h  T_f {row['T_f']:.3f} s  "
              f"delta_d {row['delta_d']:.3f} m  {'ok' if row['success'] else 'FAIL'}")
    summary = {"rows": rows, "stats": aggregate_stats(results),
               "config": _provenance(cfg, "table1", seed, params)}
    if out:
        write_csv(out / "table1.csv", rows)
        write_json(out / "table1_summary.json", summary)
    return _report_errors(results)


def cmd_fig7(args, cfg, out, jobs, seed, params) -> int:
    specs = S.gen_fig7(seed=seed, params=params)
    results = run_batch(specs, jobs)
    rows = [r.summary_row() for r in results]
    minima = v_shape_minima(rows)
    for d, (x, c) in minima.items():
        print(f"d_B0 {d:>3} m  min delta_d {c:.3f} m at x = {x:+d} m")
    summary = {"minima": {str(d): {"x": x, "delta_d": c} for d, (x, c) in minima.items()},
               "stats": aggregate_stats(results),
               "config": _provenance(cfg, "fig7", seed, params)}
    if out:
        write_csv(out / "fig7.csv", rows)
        write_json(out / "fig7_summary.json", summary)
    return _report_errors(results)


def cmd_uniform(args, cfg, out, jobs, seed, params) -> int:
    if "T" not in cfg.params_keys:
        params = dataclasses.replace(params, T=S.UNIFORM_PARAMS.T)
    count = None if args.full else (args.count or cfg.count or 2000)
    specs = S.gen_uniform_cases(count=count, seed=seed, params=params)
    results = run_batch(specs, jobs)
    stats = aggregate_stats(results)
    print(f"{stats['count']} cases  success {stats['success_rate']}%  "
          f"under 3 m {stats['collision_rate_3m']}%  overlap {stats['collision_rate_0m']}%")
    summary = {"stats": stats,
               "config": _provenance(cfg, "uniform", seed, params, count=count)}
    if out:
        write_csv(out / "uniform.csv", [r.summary_row() for r in results])
        write_json(out / "uniform_summary.json", summary)
    return _report_errors(results)


def cmd_four_av(args, cfg, out, jobs, seed, params) -> int:
    if args.full:
        mus, count = FULL_MU, FULL_FOUR_AV_COUNT
    else:
        mus = tuple(args.mu or cfg.mu or DEFAULT_MU)
        count = args.count or cfg.count or 1000
    groups, rows = {}, []
    for mu in mus:
        results = run_batch(S.gen_four_av_cases(mu, count, seed=seed, params=params), jobs)
        groups[mu] = results
        rows.extend(r.summary_row() for r in results)
    table = table2_rows(groups)
    for row in table:
        print(f"mu {row['mu']:g}  success {row['success_rate']}%  T_mIC {row['T_mIC']} s  "
              f"T_eIC0 {row['T_eIC0']} s  eta_TE {row['eta_TE']}%")
    worked = run_scenario(S.worked_four_av(seed=seed, params=params), record=False)
    summary = {"table2": table,
               "groups": {f"{mu:g}": aggregate_stats(groups[mu], mu=mu) for mu in mus},
               "worked_case": worked.summary_row(),
               "config": _provenance(cfg, "four-av", seed, params, count=count, mu=list(mus))}
    if out:
        write_csv(out / "four_av.csv", rows)
        write_csv(out / "table2.csv", table)
        write_json(out / "four_av_summary.json", summary)
    return max(_report_errors(r) for r in groups.values()) if groups else 0


def cmd_validate(args, cfg, out, jobs, seed, params) -> int:
    from .validation import run_all
    checks = run_all(seed=seed)
    for c in checks:
        print(c.line())
    if out:
        write_json(out / "validate.json", [{"name": c.name, "passed": c.passed, "detail": c.detail}
                                           for c in checks])
    return 0 if all(c.passed for c in checks) else 1


COMMANDS = {"run": cmd_run, "table1": cmd_table1, "fig7": cmd_fig7, "uniform": cmd_uniform,
            "four-av": cmd_four_av, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:          # argparse already printed usage
        return int(exc.code or 0) if exc.code in (0, None) else 2
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        out, jobs, seed, params = _settings(args, cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    code = COMMANDS[args.verb](args, cfg, out, jobs, seed, params)
    log.info("%s finished in %.1fs with exit code %d", args.verb, time.perf_counter() - t0, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
