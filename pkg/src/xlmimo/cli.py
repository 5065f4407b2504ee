"""Command-line entry point.

Exit codes: 0 success, 1 numerical/validation failure, 2 usage/config error.
The ``sweep`` subcommand keeps stdout machine-quiet (progress goes to stderr).
"""
import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiment
from .config import load_config
from .correlation import (correlation_entry_closed_form, correlation_entry_farfield,
                          correlation_entry_quadrature, dump_correlation_csv)
from .errors import ConfigError, DomainError, NumericalError
from .nearfield import draw_channel, equivalent_gain, expected_gain_exact
from .scenario import build_scenario, substream
from .scheduling import run_block_pipeline


def _build_parser():
    parser = argparse.ArgumentParser(prog="xlmimo",
                                     description="XL-MIMO scheduling/precoding simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", type=Path, help="INI configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="schema-checked override")
        p.add_argument("--seed", type=int, default=None, help="override master seed")

    run_p = sub.add_parser("run", help="one pipeline realization, per-user SE table")
    common(run_p)
    run_p.add_argument("--mode", default=None, help="scheduler mode override")

    sweep_p = sub.add_parser("sweep", help="Monte Carlo SNR sweep to CSV")
    common(sweep_p)
    sweep_p.add_argument("--out", type=Path, required=True,
                         help="output directory (created if missing)")
    sweep_p.add_argument("--threads", type=int, default=None,
                         help="override parallelism degree")
    sweep_p.add_argument("--timing", action="store_true",
                         help="record wall-clock runtime_ms (breaks byte determinism)")

    corr_p = sub.add_parser("validate-correlation",
                            help="closed form vs quadrature and far-field checks")
    common(corr_p)
    corr_p.add_argument("--fault-inject", action="store_true", help=argparse.SUPPRESS)

    gains_p = sub.add_parser("validate-gains",
                             help="Monte Carlo check of expected/equivalent channel gains")
    common(gains_p)
    gains_p.add_argument("--draws", type=int, default=10000)
    gains_p.add_argument("--fault-inject", action="store_true", help=argparse.SUPPRESS)

    dump_p = sub.add_parser("dump-scenario", help="write scenario geometry as JSON")
    common(dump_p)
    dump_p.add_argument("--out", type=Path, default=None, help="JSON path (default stdout)")
    dump_p.add_argument("--correlation-out", type=Path, default=None,
                        help="also dump user 0's correlation matrix as CSV")
    return parser


def _cmd_run(args):
    scenario_cfg, scheduler_cfg, plan = load_config(args.config, args.overrides)
    seed = args.seed if args.seed is not None else (plan.master_seed if plan else 0)
    if args.mode is not None:
        scheduler_cfg = replace(scheduler_cfg, mode=args.mode)
    scenario = build_scenario(scenario_cfg, experiment.realization_seed(seed, 0))
    rng = substream(seed, 1, 0, 0)
    result = run_block_pipeline(scenario, scheduler_cfg, rng)
    print(f"scheduler={result.mode} snr_db={10 * np.log10(scenario_cfg.snr):.6g} "
          f"seed={seed}")
    print(f"{'user':>5} {'radius_m':>9} {'angle_rad':>10} {'se_bits':>12}")
    for row, user in enumerate(result.selected):
        geo = scenario.users[user].geometry
        print(f"{user:>5} {geo.radius:>9.2f} {geo.angle:>10.4f} "
              f"{result.per_user_se[row]:>12.6f}")
    print(f"sum_se={result.sum_se:.12g} n_scheduled={len(result.selected)} "
          f"n_candidates={len(result.candidates)} prelog={result.prelog:.12g}")
    return 0


def _cmd_sweep(args):
    _, _, plan = load_config(args.config, args.overrides)
    if plan is None:
        raise ConfigError("config has no [sweep] section")
    if args.seed is not None:
        plan = replace(plan, master_seed=args.seed)
    if args.threads is not None:
        plan = replace(plan, parallelism=args.threads)
    if args.timing:
        plan = replace(plan, timing=True)
    args.out.mkdir(parents=True, exist_ok=True)
    stem = args.config.stem

    def progress(done, total):
        print(f"[sweep] {done}/{total} realizations", file=sys.stderr)

    records = experiment.snr_sweep(plan, progress=progress)
    raw_path = args.out / f"{stem}_raw.csv"
    agg_path = args.out / f"{stem}_agg.csv"
    experiment.write_raw_csv(records, raw_path)
    experiment.write_aggregate_csv(experiment.aggregate(records), agg_path)
    print(f"[sweep] wrote {raw_path} and {agg_path}", file=sys.stderr)
    return 0


def _correlation_grid(scenario_cfg):
    geom = scenario_cfg.geometry
    idx = geom.antenna_indices()
    lo, hi = int(idx[0]), int(idx[-1])
    sample = sorted({lo, lo // 2, -3, -1, 0, 1, 2, 5, hi // 2, hi} & set(range(lo, hi + 1)))
    pairs = [(m, n) for m in sample for n in sample]
    return geom, pairs


def _cmd_validate_correlation(args):
    scenario_cfg, _, _ = load_config(args.config, args.overrides)
    geom, pairs = _correlation_grid(scenario_cfg)
    phi = scenario_cfg.phi_half
    fault = 1.001 if args.fault_inject else 1.0

    worst_quad, worst_quad_case = 0.0, None
    for radius in scenario_cfg.distance_range:
        for angle in (-np.pi / 4, 0.0, np.pi / 4):
            for m, n in pairs:
                closed = fault * correlation_entry_closed_form(m, n, geom, angle, phi, radius, 1.0)
                oracle = correlation_entry_quadrature(m, n, geom, angle, phi, radius, 1.0,
                                                      abs_tol=1e-12)
                err = abs(closed - oracle) / max(abs(oracle), 1e-300)
                if err > worst_quad:
                    worst_quad, worst_quad_case = err, (m, n, radius, angle)

    # far-field agreement is absolute at unit beta: entries are bounded by
    # beta and the far-field sinc has zeros where a ratio is meaningless
    worst_far, worst_far_case = 0.0, None
    for angle in (-np.pi / 4, 0.0, np.pi / 4):
        for m, n in pairs:
            closed = fault * correlation_entry_closed_form(m, n, geom, angle, phi, 1e6, 1.0)
            far = correlation_entry_farfield(m, n, geom, angle, phi, 1.0)
            err = abs(closed - far)
            if err > worst_far:
                worst_far, worst_far_case = err, (m, n, angle)

    print(f"closed-form vs quadrature: max rel err {worst_quad:.3e} at "
          f"(m, n, r, angle)={worst_quad_case}")
    print(f"closed-form vs far-field at r=1e6 m: max abs err {worst_far:.3e} at "
          f"(m, n, angle)={worst_far_case}")
    if worst_quad <= 1e-6 and worst_far <= 1e-4:
        print("validate-correlation: OK")
        return 0
    print("validate-correlation: TOLERANCE BREACH")
    return 1


def _cmd_validate_gains(args):
    scenario_cfg, _, plan = load_config(args.config, args.overrides)
    seed = args.seed if args.seed is not None else (plan.master_seed if plan else 0)
    scenario = build_scenario(scenario_cfg, seed)
    rng = substream(seed, 7)
    draws = args.draws
    status = 0
    for k in range(scenario_cfg.num_users):
        exact = expected_gain_exact(scenario, k)
        equivalent = equivalent_gain(scenario, k)
        if args.fault_inject:
            equivalent *= 1.01
        norms = np.array([np.sum(np.abs(draw_channel(scenario, k, rng)) ** 2)
                          for _ in range(draws)])
        mean = norms.mean()
        stderr = norms.std(ddof=1) / np.sqrt(draws)
        mc_ok = abs(mean - exact) <= 3.0 * stderr
        ident_ok = abs(equivalent - exact) <= 1e-10 * exact
        if not (mc_ok and ident_ok):
            print(f"user {k}: FAIL  E||h||^2={mean:.6g} exact={exact:.6g} "
                  f"stderr={stderr:.3g} equivalent={equivalent:.6g}")
            status = 1
        else:
            print(f"user {k}: ok    E||h||^2={mean:.6g} exact={exact:.6g} "
                  f"(3sigma={3 * stderr:.3g}) equivalent-matches={ident_ok}")
    print("validate-gains:", "OK" if status == 0 else "TOLERANCE BREACH")
    return status


def _cmd_dump_scenario(args):
    scenario_cfg, _, plan = load_config(args.config, args.overrides)
    seed = args.seed if args.seed is not None else (plan.master_seed if plan else 0)
    scenario = build_scenario(scenario_cfg, seed)
    payload = {
        "seed": scenario.seed,
        "alpha": scenario.alpha,
        "num_users": scenario_cfg.num_users,
        "users": [
            {
                "radius_m": u.geometry.radius,
                "angle_rad": u.geometry.angle,
                "equivalent_gain": u.equivalent_gain,
                "paths": [
                    {"radius_m": p.radius, "angle_rad": p.angle,
                     "amplitude": p.amplitude, "is_los": p.is_los}
                    for p in u.paths
                ],
            }
            for u in scenario.users
        ],
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out is None:
        print(text)
    else:
        args.out.write_text(text + "\n", encoding="utf-8")
    if args.correlation_out is not None:
        dump_correlation_csv(scenario.users[0].corr, args.correlation_out)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "validate-correlation": _cmd_validate_correlation,
    "validate-gains": _cmd_validate_gains,
    "dump-scenario": _cmd_dump_scenario,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


def entry():
    raise SystemExit(main())
