"""Command-line front end: calibrate, run sweep campaigns, write CSV outputs.

Exit codes: 0 success, 2 usage error, 3 unreadable config, 4 configuration
invariant violation, 1 runtime failure (e.g. calibration target unreachable).
All outputs are reproducible from (config file + flags + seed); files are
written atomically via a temp file and rename.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .engine import run_campaign, run_replication, write_log_csv, _rng, _S_PLACEMENT
from .errors import ConfigError, SimulationError
from .metrics import aggregate, diagnostics_row, write_diagnostics_csv, write_summary_csv
from .rats import load_profiles
from .scenario import (Involvement, build_world, calibrate_bs_distance,
                       config_from_dict, config_hash, write_snapshot_csv)

DEFAULT_SWEEP = (0, 5, 10, 20, 50, 100, 200)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lpwansim",
        description="Vehicle-assisted LPWAN uplink simulator (Manhattan grid)")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--rat", choices=["SIGFOX", "LORAWAN", "HALOW", "NBIOT"],
                   help="override the config's radio technology")
    p.add_argument("--involvement", choices=["baseline", "type1", "type2"],
                   help="restrict the sweep to one involvement strategy")
    p.add_argument("--vehicles", type=int, action="append", metavar="N",
                   help="assisting-vehicle sweep point (repeatable)")
    p.add_argument("--rounds", type=int, help="replications per sweep point")
    p.add_argument("--seed", type=int, help="base seed override")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel replications (default 1)")
    p.add_argument("--calibrate-only", action="store_true",
                   help="print the calibrated BS distance and stop")
    p.add_argument("--emit-snapshot", action="store_true",
                   help="write a deployment snapshot CSV of the t=0 world")
    p.add_argument("--export-logs", action="store_true",
                   help="write one CSV per replication under <out>/logs/")
    return p


def _fail(category: str, message: str, code: int) -> int:
    sys.stderr.write(f"error:{category}:{message}\n".replace("\n", " ").strip() + "\n")
    return code


def _atomic_write(path: str, writer):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("config-unreadable", str(exc), 3)

    try:
        cfg = config_from_dict(raw)
        overrides = {}
        if args.rat:
            overrides["rat"] = args.rat
        if args.rounds is not None:
            overrides["rounds"] = args.rounds
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            cfg = cfg.with_overrides(**overrides)
    except ConfigError as exc:
        return _fail("config-invalid", str(exc), 4)

    sweep = tuple(args.vehicles) if args.vehicles else DEFAULT_SWEEP
    if any(v < 0 or v > cfg.n_vehicles for v in sweep):
        return _fail("config-invalid", "sweep vehicle counts must lie in [0, n_vehicles]", 4)
    if args.involvement == "baseline":
        involvements = []
    elif args.involvement:
        involvements = [Involvement(args.involvement.upper())]
    else:
        involvements = [Involvement.TYPE1, Involvement.TYPE2]

    profiles = load_profiles()
    profile = profiles[cfg.rat]
    try:
        bs_distance = calibrate_bs_distance(cfg, profile, workers=args.workers)
    except SimulationError as exc:
        return _fail("calibration", str(exc), 1)

    if args.calibrate_only:
        print(f"calibrated_distance_m={bs_distance!r}")
        return 0

    os.makedirs(args.out, exist_ok=True)
    try:
        base_cfg = cfg.with_overrides(involvement=Involvement.BASELINE,
                                      n_assisting_vehicles=0)
        baseline_logs = run_campaign(base_cfg, cfg.rounds, cfg.seed,
                                     bs_distance_m=bs_distance, workers=args.workers)
        reports = [aggregate(baseline_logs, baseline_logs)]
        diag = [diagnostics_row(baseline_logs, reports[0])]
        if args.export_logs:
            _export_logs(args.out, "BASELINE", 0, baseline_logs)
        for inv in involvements:
            for k in sweep:
                if k == 0:
                    # identical to baseline under common random numbers
                    rep = aggregate(baseline_logs, baseline_logs,
                                    involvement=inv.value, n_assisting=0)
                    logs = baseline_logs
                else:
                    point_cfg = cfg.with_overrides(involvement=inv,
                                                   n_assisting_vehicles=k)
                    logs = run_campaign(point_cfg, cfg.rounds, cfg.seed,
                                        bs_distance_m=bs_distance, workers=args.workers)
                    rep = aggregate(logs, baseline_logs)
                reports.append(rep)
                diag.append(diagnostics_row(logs, rep))
                if args.export_logs and k != 0:
                    _export_logs(args.out, inv.value, k, logs)
    except SimulationError as exc:
        return _fail("simulation", str(exc), 1)

    _atomic_write(os.path.join(args.out, "summary.csv"),
                  lambda p: write_summary_csv(reports, p))
    _atomic_write(os.path.join(args.out, "diagnostics.csv"),
                  lambda p: write_diagnostics_csv(diag, p))

    if args.emit_snapshot:
        world = build_world(cfg, _rng(cfg.seed, _S_PLACEMENT), bs_distance)
        _atomic_write(os.path.join(args.out, "snapshot.csv"),
                      lambda p: write_snapshot_csv(world, p))

    manifest = {
        "version": __version__,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "rat": cfg.rat,
        "rounds": cfg.rounds,
        "bs_distance_m": bs_distance,
        "sweep": list(sweep),
        "involvements": [i.value for i in involvements],
    }
    _atomic_write(os.path.join(args.out, "manifest.json"),
                  lambda p: _write_json(manifest, p))
    print(os.path.join(args.out, "summary.csv"))
    return 0


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _export_logs(out_dir: str, involvement: str, k: int, logs):
    d = os.path.join(out_dir, "logs", f"{involvement}_{k:04d}")
    os.makedirs(d, exist_ok=True)
    for i, log in enumerate(logs):
        _atomic_write(os.path.join(d, f"rep{i:03d}.csv"),
                      lambda p, log=log: write_log_csv(log, p))


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
