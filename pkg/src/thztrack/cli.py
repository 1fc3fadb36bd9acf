"""Command-line entry points: codebook-build, simulate, sweep, pattern.

Exit codes: 0 success, 2 configuration or usage error, 3 codebook error
(missing file, version, fingerprint, corrupt payload), 4 run or build failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import codebook as cbmod
from .codebook import CodebookBuildError, CodebookError, build_codebook, scenario_fingerprint
from .config import (
    ConfigError,
    RunConfig,
    build_event_params,
    build_grid,
    build_objective_template,
    build_pso,
    build_scenario,
    parse_config_file,
)
from .exports import pattern_gain_db, write_pattern, write_sweep, write_trace
from .geometry import path_to_interval
from .optimizer import ObjectiveSpec, optimize_omega
from .precoder import adaptive_precoder, bf_gain_profile
from .seeding import derive_seed
from .tracking import (
    SCHEME_CONVENTIONAL,
    SCHEME_EVENT,
    SCHEME_PROPOSED,
    TrackingRunError,
    compute_metrics,
    run_conventional,
    run_event_based,
    run_sensing_assisted,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CODEBOOK = 3
EXIT_RUN = 4

_SCHEME_LABELS = {
    "proposed": SCHEME_PROPOSED,
    "conventional": SCHEME_CONVENTIONAL,
    "event": SCHEME_EVENT,
}
_SCHEME_SLUGS = {"proposed": "proposed", "conventional": "conventional", "event": "event_based"}


def _parse_values(raw: str) -> list[float]:
    values = [v for v in (part.strip() for part in raw.split(",")) if v]
    if not values:
        raise ConfigError("no values given; expected a comma-separated list")
    try:
        return [float(v) for v in values]
    except ValueError as exc:
        raise ConfigError(f"cannot parse value list {raw!r}") from exc


def _load_config(args) -> RunConfig:
    return parse_config_file(args.config)


def _default_jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    return max(1, os.cpu_count() or 1)


def _out_dir(args, config: RunConfig) -> Path:
    out = Path(args.out) if args.out else Path(config.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_codebook(args, config: RunConfig):
    path = args.codebook or config.codebook.path
    template = build_objective_template(config)
    expected = scenario_fingerprint(
        template.cfg, template.budget, template.tau, template.alpha, template.r_min
    )
    return cbmod.load(path, expected_fingerprint=expected)


def cmd_codebook_build(args) -> int:
    config = _load_config(args)
    grid = build_grid(config)
    template = build_objective_template(config)
    pso = build_pso(config, seed=args.seed)
    started = time.perf_counter()
    cb = build_codebook(grid, template, pso, jobs=_default_jobs(args))
    elapsed = time.perf_counter() - started
    out_path = Path(args.out) if args.out else Path(config.codebook.path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    cbmod.save(cb, out_path)
    print(f"cells={len(cb.entries)} seed={cb.base_seed} fingerprint={cb.fingerprint}")
    print(f"written {out_path} in {elapsed:.1f} s")
    return EXIT_OK


def _run_scheme(key: str, scenario, cb, config: RunConfig, seed: int | None):
    if key == "proposed":
        return run_sensing_assisted(scenario, cb)
    if key == "conventional":
        return run_conventional(scenario)
    return run_event_based(scenario, build_event_params(config, seed))


def cmd_simulate(args) -> int:
    config = _load_config(args)
    scenario = build_scenario(config)
    keys = list(_SCHEME_LABELS) if args.scheme == "all" else [args.scheme]
    cb = _load_codebook(args, config) if "proposed" in keys else None
    out = _out_dir(args, config)
    window = (scenario.start_angle, scenario.end_angle)
    for key in keys:
        rec = _run_scheme(key, scenario, cb, config, args.seed)
        trace_path = out / f"trace_{_SCHEME_SLUGS[key]}.csv"
        write_trace(rec, trace_path, config.output.delimiter)
        m = compute_metrics(rec, window)
        print(
            f"{rec.scheme}: avg_rate={m.avg_rate:.6e} bit/s "
            f"outage={m.outage_prob:.4f} realignments={m.realignment_count} "
            f"-> {trace_path}"
        )
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .tracking import sweep  # local import keeps CLI startup light

    config = _load_config(args)
    template = build_scenario(config)
    values = _parse_values(args.values)
    keys = [k.strip() for k in args.schemes.split(",") if k.strip()]
    for key in keys:
        if key not in _SCHEME_LABELS:
            raise ConfigError(f"unknown scheme {key!r}; choose from {sorted(_SCHEME_LABELS)}")
    cb = _load_codebook(args, config) if "proposed" in keys else None
    rows = sweep(
        template,
        args.axis,
        values,
        keys,
        cb,
        event_params=build_event_params(config, args.seed),
        jobs=_default_jobs(args),
    )
    out = _out_dir(args, config)
    table_path = out / "sweep.csv"
    write_sweep(rows, table_path, config.output.delimiter)
    print(f"{len(rows)} rows -> {table_path}")
    for key in keys:
        label = _SCHEME_LABELS[key]
        scheme_rows = [r for r in rows if r.scheme == label]
        path = out / f"sweep_{_SCHEME_SLUGS[key]}.csv"
        write_sweep(scheme_rows, path, config.output.delimiter)
        print(f"  {label} -> {path}")
    return EXIT_OK


def cmd_pattern(args) -> int:
    config = _load_config(args)
    template = build_scenario(config)
    pso = build_pso(config, seed=args.seed)
    velocities = _parse_values(args.velocities)
    out = _out_dir(args, config)
    sin_grid = np.linspace(-1.0, 1.0, 2001)
    for velocity in velocities:
        scenario = build_scenario(config, velocity=velocity)
        state = scenario.state_at(0.0)
        interval = path_to_interval(state, scenario.tau, scenario.geom)
        spec = ObjectiveSpec(
            state=state,
            tau=scenario.tau,
            interval=interval,
            budget=scenario.budget,
            cfg=scenario.cfg,
            r_min=scenario.r_min,
            alpha=config.optimizer.alpha,
            n_quad=config.optimizer.n_quad,
            geom=scenario.geom,
        )
        result = optimize_omega(
            spec, replace(pso, seed=derive_seed("pattern", pso.seed, velocity))
        )
        beam = adaptive_precoder(interval, result.omega_star, scenario.cfg)
        gains = bf_gain_profile(sin_grid, beam, scenario.cfg)
        path = out / f"pattern_v{velocity:g}.csv"
        write_pattern(sin_grid, pattern_gain_db(gains), path, config.output.delimiter)
        params = beam.as_record()
        print(
            f"v={velocity:g} m/s: theta_m={params['theta_m']:.6f} delta={params['delta']:.6f} "
            f"omega={params['omega']:.6f} beta={params['beta']:.6e} "
            f"peak={10 * math.log10(max(gains)):.2f} dB -> {path}"
        )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thztrack",
        description="Sensing-assisted THz beam tracking simulator",
        epilog="exit codes: 0 ok, 2 config/usage, 3 codebook, 4 run failure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, codebook=False):
        p.add_argument("--config", required=True, help="run configuration (INI)")
        p.add_argument("--out", help="output directory or file")
        p.add_argument("--seed", type=int, help="override the configured master seed")
        p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
        if codebook:
            p.add_argument("--codebook", help="codebook file (default from config)")

    p_build = sub.add_parser("codebook-build", help="optimise and save the beam codebook")
    common(p_build)
    p_build.set_defaults(func=cmd_codebook_build)

    p_sim = sub.add_parser("simulate", help="run one tracking episode per scheme")
    common(p_sim, codebook=True)
    p_sim.add_argument(
        "--scheme",
        default="all",
        choices=["proposed", "conventional", "event", "all"],
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="metrics over a velocity or power axis")
    common(p_sweep, codebook=True)
    p_sweep.add_argument("--axis", required=True, choices=["velocity", "tx_power"])
    p_sweep.add_argument("--values", required=True, help="comma-separated axis values")
    p_sweep.add_argument(
        "--schemes", default="proposed,conventional,event", help="comma-separated schemes"
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_pattern = sub.add_parser("pattern", help="beam patterns for a velocity list")
    common(p_pattern)
    p_pattern.add_argument("--velocities", required=True, help="comma-separated m/s values")
    p_pattern.set_defaults(func=cmd_pattern)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CodebookBuildError, TrackingRunError) as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return EXIT_RUN
    except CodebookError as exc:
        print(f"codebook error: {exc}", file=sys.stderr)
        return EXIT_CODEBOOK


if __name__ == "__main__":
    sys.exit(main())
