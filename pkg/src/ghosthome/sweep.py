"""Seeded train/test split, Cartesian parameter sweeps and frozen evaluation."""

from __future__ import annotations

import csv
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

from .batch import run_detector
from .config import PARAM_KEYS, frozen_profile, params_from_flat
from .metrics import DEFAULT_THRESHOLDS, NoEvaluableUsers, ValidationReport, score
from .model import ALGORITHMS, DetectionParams, UserTrajectory
from .rng import SplitMix64

log = logging.getLogger(__name__)

NIGHT_STARTS = [20, 21, 22]
NIGHT_ENDS = [5, 6, 7]
SPATIAL = [20.0, 50.0, 150.0, 250.0]

# parameter ranges from the sensitivity study
DEFAULT_GRID: Dict[str, Dict[str, list]] = {
    "a1": {"a1.bandwidth_m": SPATIAL, "night_start_hour": NIGHT_STARTS, "night_end_hour": NIGHT_ENDS},
    "a2": {
        "a2.stay_dist_m": SPATIAL,
        "a2.stay_time_min": [10.0, 25.0, 50.0],
        "a2.region_radius_m": SPATIAL,
        "night_start_hour": NIGHT_STARTS,
        "night_end_hour": NIGHT_ENDS,
    },
    "dbscan": {"dbscan.eps_m": SPATIAL, "dbscan.min_pts": [2, 4, 6],
               "night_start_hour": NIGHT_STARTS, "night_end_hour": NIGHT_ENDS},
    "kmeanspp": {
        "kmeans.k": [2, 4, 6],
        "kmeans.random_state": [42, 100, 2048],
        "kmeans.n_init": [20],
        "night_start_hour": NIGHT_STARTS,
        "night_end_hour": NIGHT_ENDS,
    },
    "frequency": {"night_start_hour": NIGHT_STARTS, "night_end_hour": NIGHT_ENDS},
    "ghost": {"grid_size": SPATIAL, "night_start_hour": NIGHT_STARTS, "night_end_hour": NIGHT_ENDS},
}


class TooFewUsers(ValueError):
    pass


def split_users(user_ids: Sequence[str], train_fraction: float = 0.8, seed: int = 42):
    """Sort, shuffle with SplitMix64(seed), and cut at ceil(fraction * n)."""
    ids = sorted(set(user_ids))
    if len(ids) < 2:
        raise TooFewUsers(f"need at least 2 users to split, got {len(ids)}")
    if not 0.0 < train_fraction < 1.0:
        raise TooFewUsers(f"train_fraction {train_fraction} leaves one side empty")
    SplitMix64(seed).shuffle(ids)
    cut = math.ceil(train_fraction * len(ids))
    if cut >= len(ids):
        raise TooFewUsers(f"{len(ids)} users leave no test users at train_fraction {train_fraction}")
    return ids[:cut], ids[cut:]


def combinations(param_lists: Mapping[str, list]) -> List[Tuple[Tuple[str, object], ...]]:
    """Cartesian product in canonical key order with each list sorted, so the
    output order is the lexicographic order of parameter tuples."""
    keys = [k for k in PARAM_KEYS if k in param_lists]
    if not keys:
        return [()]
    values = [sorted(set(param_lists[k])) for k in keys]
    return [tuple(zip(keys, combo)) for combo in itertools.product(*values)]


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    params: Tuple[Tuple[str, object], ...]
    train_mae_m: float
    train_rmse_m: float
    n_evaluated: int

    def detection_params(self) -> DetectionParams:
        return params_from_flat(dict(self.params), frozen_profile(self.algorithm))


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[SweepRow, ...]
    best: Dict[str, SweepRow]


def _evaluate(task):
    algorithm, combo, trajectories, truth, thresholds = task
    params = params_from_flat(dict(combo), frozen_profile(algorithm))
    estimates = [run_detector(algorithm, t, params) for t in trajectories]
    try:
        report = score(estimates, truth, thresholds)
    except NoEvaluableUsers:
        return SweepRow(algorithm, combo, math.nan, math.nan, 0)
    return SweepRow(algorithm, combo, report.mae_m, report.rmse_m, report.n_evaluated)


def _best(rows: Sequence[SweepRow]) -> SweepRow:
    # rows arrive in parameter-tuple order, so min() keeps the smallest tuple on ties
    return min(rows, key=lambda r: r.train_mae_m if r.n_evaluated else math.inf)


def run_sweep(trajectories: Sequence[UserTrajectory], truth: Mapping[str, Tuple[float, float]],
              grid: Mapping[str, Mapping[str, list]], thresholds=DEFAULT_THRESHOLDS,
              workers: int = 1) -> SweepResult:
    """Score every parameter combination on the given (training) users."""
    trajectories = sorted(trajectories, key=lambda t: t.user_id)
    users = {t.user_id for t in trajectories}
    truth = {u: truth[u] for u in sorted(users) if u in truth}
    tasks = []
    for algorithm in ALGORITHMS:
        if algorithm not in grid:
            continue
        if not grid[algorithm]:
            log.info("sweep grid for %s is empty; skipping", algorithm)
            continue
        for combo in combinations(grid[algorithm]):
            tasks.append((algorithm, combo, trajectories, truth, tuple(thresholds)))
    if workers <= 1:
        rows = [_evaluate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate, tasks))
    best = {}
    for algorithm in ALGORITHMS:
        alg_rows = [r for r in rows if r.algorithm == algorithm]
        if alg_rows:
            best[algorithm] = _best(alg_rows)
    return SweepResult(tuple(rows), best)


def evaluate_frozen(trajectories: Sequence[UserTrajectory], truth: Mapping[str, Tuple[float, float]],
                    frozen: Mapping[str, DetectionParams], thresholds=DEFAULT_THRESHOLDS,
                    ) -> Dict[str, ValidationReport]:
    """One validation report per algorithm; raises NoEvaluableUsers if an
    algorithm detects no scorable user."""
    trajectories = sorted(trajectories, key=lambda t: t.user_id)
    users = {t.user_id for t in trajectories}
    truth = {u: truth[u] for u in sorted(users) if u in truth}
    reports = {}
    for algorithm in ALGORITHMS:
        if algorithm in frozen:
            estimates = [run_detector(algorithm, t, frozen[algorithm]) for t in trajectories]
            reports[algorithm] = score(estimates, truth, thresholds)
    return reports


def _column(key: str) -> str:
    return key.replace(".", "_")


def _fmt(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:g}"
    return str(value)


def write_sweep_csv(path, result: SweepResult) -> None:
    used = {k for r in result.rows for k, _ in r.params}
    keys = [k for k in PARAM_KEYS if k in used]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", *map(_column, keys), "train_mae_m", "train_rmse_m", "n_evaluated"])
        for r in result.rows:
            values = dict(r.params)
            w.writerow([
                r.algorithm,
                *(_fmt(values[k]) if k in values else "" for k in keys),
                "" if r.n_evaluated == 0 else f"{r.train_mae_m:.3f}",
                "" if r.n_evaluated == 0 else f"{r.train_rmse_m:.3f}",
                r.n_evaluated,
            ])
