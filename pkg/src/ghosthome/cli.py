"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .batch import detect_batch
from .config import PARAM_KEYS, ConfigError, resolve_config, write_profile
from .export import export_map
from .io import IngestError, load_input, read_results, write_results, write_trajectories_csv
from .metrics import NoEvaluableUsers, load_ground_truth, score, write_ground_truth, write_report
from .model import ALGORITHMS, RecordRejected, UserTrajectory
from .sweep import DEFAULT_GRID, TooFewUsers, evaluate_frozen, run_sweep, split_users, write_sweep_csv
from .synthetic import SynthSpec, generate

log = logging.getLogger("ghosthome")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _flag(key: str) -> str:
    return "--" + key.replace(".", "-").replace("_", "-")


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("detection parameters (override the config file)")
    g.add_argument("--algorithm", choices=ALGORITHMS, default=None,
                   help="detector to run (default ghost); unset parameters take its frozen profile")
    for key in PARAM_KEYS:
        help_text = None
        if key == "night_start_hour":
            help_text = "night window start; equal start and end hours select the whole day"
        if key == "weekend_days":
            help_text = "comma-separated days, Monday=0 ... Sunday=6"
        g.add_argument(_flag(key), dest=f"param:{key}", default=None, metavar="VALUE", help=help_text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="YAML config file (defaults to $GHOST_CONFIG when set)")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--workers", default=None, type=int, help="parallel worker processes")


def _flags(args) -> dict:
    flags = {}
    for name, value in vars(args).items():
        if name.startswith("param:"):
            flags[name[len("param:"):]] = value
    for key in ("algorithm", "output_dir", "workers", "ground_truth", "seed",
                "thresholds", "train_fraction"):
        if hasattr(args, key):
            flags[key] = getattr(args, key)
    if getattr(args, "input", None):
        flags["input"] = args.input
    return flags


def _resolve(args):
    if args.config is not None and not os.path.isfile(args.config):
        raise ConfigError(f"config file not found: {args.config}")
    return resolve_config(args.config, _flags(args))


def _output_dir(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(cfg):
    if not cfg.inputs:
        raise UsageError("no input given (positional INPUT or 'input' in the config file)")
    trajectories = []
    for path in cfg.inputs:
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        ts, summary = load_input(path)
        log.info("%s: %d files, %d accepted, %d rejected %s", path, summary.files_read,
                 summary.records_accepted, summary.records_rejected, dict(summary.rejection_breakdown))
        trajectories.extend(ts)
    return _merge(trajectories)


def _merge(trajectories):
    by_user = {}
    for t in trajectories:
        by_user.setdefault(t.user_id, []).extend(t.points)
    return [UserTrajectory.from_points(u, by_user[u]) for u in sorted(by_user)]


def cmd_detect(args) -> int:
    cfg = _resolve(args)
    trajectories = _load(cfg)
    estimates = detect_batch(trajectories, cfg.algorithm, cfg.params, cfg.workers)
    out = _output_dir(cfg) / "results.csv"
    write_results(out, estimates)
    n_none = sum(not e.detected for e in estimates)
    log.info("wrote %s (%d users, %d without a home)", out, len(estimates), n_none)
    print(out)
    return 0


def cmd_validate(args) -> int:
    cfg = _resolve(args)
    if not cfg.ground_truth:
        raise UsageError("validate needs --ground-truth")
    estimates = read_results(args.results)
    truth = load_ground_truth(cfg.ground_truth)
    report = score(estimates, truth, cfg.thresholds)
    out = _output_dir(cfg)
    write_report(report, out / "validation_records.csv", out / "validation_summary.json")
    print(json.dumps(report.summary(), indent=2, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    cfg = _resolve(args)
    if not cfg.ground_truth:
        raise UsageError("sweep needs --ground-truth")
    grid = cfg.sweep if cfg.sweep is not None else DEFAULT_GRID
    if args.algorithms:
        wanted = [a.strip() for a in args.algorithms.split(",") if a.strip()]
        unknown = set(wanted) - set(ALGORITHMS)
        if unknown:
            raise UsageError(f"unknown algorithms {sorted(unknown)}")
        grid = {a: v for a, v in grid.items() if a in wanted}
    trajectories = _load(cfg)
    truth = load_ground_truth(cfg.ground_truth)
    users = [t.user_id for t in trajectories if t.user_id in truth]
    train_ids, test_ids = split_users(users, cfg.train_fraction, cfg.seed)
    train = [t for t in trajectories if t.user_id in set(train_ids)]
    test = [t for t in trajectories if t.user_id in set(test_ids)]

    result = run_sweep(train, truth, grid, cfg.thresholds, cfg.workers)
    out = _output_dir(cfg)
    write_sweep_csv(out / "sweep.csv", result)
    profiles_dir = out / "best_profiles"
    profiles_dir.mkdir(exist_ok=True)
    frozen = {}
    for algorithm, row in result.best.items():
        if row.n_evaluated == 0:
            log.warning("%s: no combination produced an evaluable user", algorithm)
            continue
        frozen[algorithm] = row.detection_params()
        write_profile(profiles_dir / f"{algorithm}.yaml", algorithm, frozen[algorithm])

    summary = {"train_users": sorted(train_ids), "test_users": sorted(test_ids), "test": {}}
    for algorithm, params in frozen.items():
        try:
            report = evaluate_frozen(test, truth, {algorithm: params}, cfg.thresholds)[algorithm]
            summary["test"][algorithm] = report.summary()
        except NoEvaluableUsers:
            summary["test"][algorithm] = None
    with open(out / "test_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(out / "sweep.csv")
    return 0


def cmd_export_map(args) -> int:
    estimates = read_results(args.results)
    trajectories = None
    if args.points:
        trajectories = _merge(load_input(args.points)[0])
    out = Path(args.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    export_map(estimates, out / "homes.geojson", out / "map.html", trajectories)
    print(out / "homes.geojson")
    return 0


def cmd_gen_synthetic(args) -> int:
    try:
        spec = SynthSpec(n_users=args.users, days=args.days, sigma_m=args.sigma,
                         work_offset_m=args.work_offset,
                         night_rate=0 if args.no_night else args.night_rate,
                         day_rate=args.day_rate, dropout=args.dropout, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    trajectories, truth = generate(spec)
    out = Path(args.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_trajectories_csv(out / "trajectories.csv", trajectories)
    write_ground_truth(out / "ground_truth.csv", truth)
    print(out / "trajectories.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ghosthome", description="Home location detection from GPS trajectories.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="infer one home per user")
    p.add_argument("input", nargs="?", help="GPX file, CSV file or directory")
    _add_common(p)
    _add_param_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("validate", help="score a results file against ground truth")
    p.add_argument("results")
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--thresholds", default=None, help="comma-separated metres, default 50,100,250")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="parameter sweep on a seeded training split")
    p.add_argument("input", nargs="?")
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--seed", default=None, type=int)
    p.add_argument("--train-fraction", default=None, type=float)
    p.add_argument("--thresholds", default=None)
    p.add_argument("--algorithms", default=None, help="comma-separated subset of the grid to run")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-map", help="GeoJSON and HTML map of a results file")
    p.add_argument("results")
    p.add_argument("--points", default=None, help="raw input to draw traces from")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_export_map)

    p = sub.add_parser("gen-synthetic", help="write a synthetic dataset with planted homes")
    p.add_argument("--users", type=int, default=50)
    p.add_argument("--days", type=int, default=14)
    p.add_argument("--sigma", type=float, default=10.0, help="home/work jitter in metres")
    p.add_argument("--work-offset", type=float, default=2000.0)
    p.add_argument("--night-rate", type=int, default=6, help="pings per night hour")
    p.add_argument("--day-rate", type=int, default=12, help="pings per daytime hour")
    p.add_argument("--no-night", action="store_true", help="drop all night pings")
    p.add_argument("--dropout", type=float, default=0.52)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_gen_synthetic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"ghosthome: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestError, FileNotFoundError, NotADirectoryError, NoEvaluableUsers,
            TooFewUsers, RecordRejected, ValueError) as exc:
        print(f"ghosthome: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
