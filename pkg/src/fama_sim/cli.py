"""
Command-line front end.

    fama-sim run -c config.json -o results.csv [--seed S] [--trials T] [--threads N] [--plot]
    fama-sim rpdr patterns.csv -o envelope.csv [--grid-step D] [--plot]
    fama-sim gen-patterns --n-ports 20 -o patterns.csv [profile options]

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import platform
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, DataError, load_config, profile_from_dict, resolved
from .montecarlo import default_workers, estimate
from .patterns import (
    PatternError,
    SyntheticProfile,
    dump_pattern_set,
    envelope_rows,
    load_pattern_set,
    make_synthetic_dcfa_set,
    make_synthetic_set,
    rpdr,
)

log = logging.getLogger("fama_sim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

RESULT_COLUMNS = ("snr_db", "m_users", "strategy", "antenna", "n_trials", "outage",
                  "ci_low", "ci_high", "mux_gain", "seed")


def result_row(est):
    c = est.config
    return {
        "snr_db": c.snr_db,
        "m_users": c.m_users,
        "strategy": c.strategy.name,
        "antenna": c.antenna.name,
        "n_trials": est.n_trials,
        "outage": est.outage_hat,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "mux_gain": est.mux_gain,
        "seed": est.seed,
    }


def format_results(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow([
            f"{r['snr_db']:g}", r["m_users"], r["strategy"], r["antenna"], r["n_trials"],
            repr(r["outage"]), repr(r["ci_low"]), repr(r["ci_high"]), repr(r["mux_gain"]),
            r["seed"],
        ])
    return buf.getvalue()


def read_results(text):
    """Parse a results CSV back into typed dicts."""
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append({
            "snr_db": float(r["snr_db"]), "m_users": int(r["m_users"]),
            "strategy": r["strategy"], "antenna": r["antenna"],
            "n_trials": int(r["n_trials"]), "outage": float(r["outage"]),
            "ci_low": float(r["ci_low"]), "ci_high": float(r["ci_high"]),
            "mux_gain": float(r["mux_gain"]), "seed": int(r["seed"]),
        })
    return rows


def _figure_paths(output):
    out = Path(output)
    stem = out.with_suffix("")
    return Path(f"{stem}_outage.png"), Path(f"{stem}_mux_gain.png")


def cmd_run(args):
    threads = args.threads if args.threads is not None else None
    plan = load_config(args.config, seed=args.seed, trials=args.trials, threads=threads)
    workers = plan.threads or default_workers()
    log.info("running %d sweep points with %d worker(s)", len(plan.configs), workers)
    started = time.time()
    estimates = []
    for n, cfg in enumerate(plan.configs, 1):
        est = estimate(cfg, workers)
        estimates.append(est)
        log.info("[%d/%d] %s %s M=%d SNR=%g dB: outage=%.5f", n, len(plan.configs),
                 cfg.antenna.name, cfg.strategy.name, cfg.m_users, cfg.snr_db, est.outage_hat)
    rows = [result_row(e) for e in estimates]
    text = format_results(rows)
    out = Path(args.output)
    out.write_text(text, encoding="utf-8")

    manifest = {
        "tool": "fama-sim",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "command": "run",
        "config_path": str(args.config),
        "input_digests": plan.input_digests,
        "master_seed": plan.master_seed,
        "common_random_numbers": plan.common_random_numbers,
        "workers": workers,
        "started_unix": started,
        "wall_clock_s": time.time() - started,
        "output": str(out),
        "output_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "points": [
            dict(resolved(e.config), row=n, outage_count=e.outage_count)
            for n, e in enumerate(estimates, 1)
        ],
    }
    Path(f"{out}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                            encoding="utf-8")
    if args.plot:
        from .plotting import plot_sweep
        plot_sweep(rows, *_figure_paths(out))
    return EXIT_OK


def _read_patterns(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read pattern file {path}: {exc.strerror}") from None
    try:
        return load_pattern_set(data)
    except PatternError as exc:
        raise DataError(f"{path}: {exc}") from None


def format_envelope(env):
    lines = ["angle_deg,upper_dbi,lower_dbi,range_db"]
    lines += [",".join(r) for r in envelope_rows(env)]
    lines.append(f"# avg_range_db={env.avg_range_db:.4f}")
    return "\n".join(lines) + "\n"


def cmd_rpdr(args):
    opts = {}
    if args.config:
        opts = _load_json(args.config)
        unknown = set(opts) - {"patterns", "grid_step_deg"}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown key")
    path = args.patterns or opts.get("patterns")
    if path is None:
        raise ConfigError("patterns", "a pattern file is required")
    pset = _read_patterns(path)
    step = args.grid_step if args.grid_step is not None else opts.get("grid_step_deg")
    grid = None
    if step is not None:
        if not 0 < step <= 360:
            raise ConfigError("grid_step_deg", "must lie in (0, 360]")
        n = int(round(360.0 / step))
        grid = np.arange(n) * (360.0 / n)
    env = rpdr(pset, grid)
    Path(args.output).write_text(format_envelope(env), encoding="utf-8")
    print(f"avg_range_db={env.avg_range_db:.4f}")
    if args.plot:
        from .plotting import plot_rpdr
        plot_rpdr(env, Path(args.output).with_suffix(".png"))
    return EXIT_OK


PROFILE_FLAGS = {
    "peak_gain_dbi": "--peak-gain",
    "floor_dbi": "--floor",
    "lobe_center_deg": "--lobe-center",
    "lobe_width_deg": "--lobe-width",
    "null_depth_db": "--null-depth",
    "null_width_deg": "--null-width",
    "null_start_deg": "--null-start",
    "null_drift_deg": "--null-drift",
    "grid_step_deg": "--grid-step",
    "frequency_ghz": "--frequency",
}


def cmd_gen_patterns(args):
    base = {}
    if args.config:
        base = _load_json(args.config)
    for name in PROFILE_FLAGS:
        val = getattr(args, name)
        if val is not None:
            base[name] = val
    profile = profile_from_dict(base)
    try:
        if args.layout == "dcfa":
            pset = make_synthetic_dcfa_set(args.n1, args.n2, profile)
        else:
            pset = make_synthetic_set(args.n_ports, profile)
    except PatternError as exc:
        raise ConfigError("profile", str(exc)) from None
    Path(args.output).write_text(dump_pattern_set(pset), encoding="utf-8")
    return EXIT_OK


def _load_json(path):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError("<root>", "expected a JSON object")
    return obj


def _positive_int(text):
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="JSON configuration file")
    common.add_argument("-o", "--output", required=True, help="output CSV path")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--threads", type=_positive_int,
                        help="worker threads (default: $FAMA_SIM_THREADS or 1)")
    common.add_argument("--trials", type=_positive_int, help="override trials per point")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="fama-sim", description="Fluid antenna multiple access link-level simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run an outage / multiplexing-gain sweep")
    run.add_argument("--plot", action="store_true", help="also write PNG figures")
    run.set_defaults(func=cmd_run)

    rp = sub.add_parser("rpdr", parents=[common], help="pattern dynamic-range envelopes")
    rp.add_argument("patterns", nargs="?", help="pattern CSV file")
    rp.add_argument("--grid-step", type=float, help="evaluation grid step in degrees")
    rp.add_argument("--plot", action="store_true", help="also write a PNG figure")
    rp.set_defaults(func=cmd_rpdr)

    gp = sub.add_parser("gen-patterns", parents=[common], help="write synthetic pattern CSV")
    gp.add_argument("--n-ports", type=_positive_int, default=20)
    gp.add_argument("--layout", choices=("linear", "dcfa"), default="linear")
    gp.add_argument("--n1", type=_positive_int, default=12)
    gp.add_argument("--n2", type=_positive_int, default=12)
    defaults = SyntheticProfile()
    for f in fields(SyntheticProfile):
        gp.add_argument(PROFILE_FLAGS[f.name], dest=f.name, type=float,
                        help=f"default {getattr(defaults, f.name):g}")
    gp.set_defaults(func=cmd_gen_patterns)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "run" and not args.config:
        print("fama-sim run: error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fama-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"fama-sim: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"fama-sim: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
