"""Scoring home estimates against ground truth."""

from __future__ import annotations

import csv
import json
import math
import os
import statistics
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .geo import haversine_m
from .model import CoordinateOutOfRange, HomeEstimate, ValidationRecord

DEFAULT_THRESHOLDS = (50.0, 100.0, 250.0)


class NoEvaluableUsers(ValueError):
    pass


class DuplicateUser(ValueError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    records: Tuple[ValidationRecord, ...]
    mae_m: float
    rmse_m: float
    median_m: float
    hit_rates: Dict[float, float]
    n_evaluated: int
    n_missing: int
    missing_users: Tuple[str, ...] = field(default=())

    def summary(self) -> dict:
        return {
            "mae_m": round(self.mae_m, 3),
            "rmse_m": round(self.rmse_m, 3),
            "median_m": round(self.median_m, 3),
            "hit_rates": {_threshold_key(t): round(r, 6) for t, r in sorted(self.hit_rates.items())},
            "n_evaluated": self.n_evaluated,
            "n_missing": self.n_missing,
            "missing_users": list(self.missing_users),
        }


def _threshold_key(t: float) -> str:
    return f"{t:g}"


def mae(errors: Sequence[float]) -> float:
    return math.fsum(errors) / len(errors)


def rmse(errors: Sequence[float]) -> float:
    # scale by the largest error so tiny values do not underflow when squared
    top = max(abs(e) for e in errors)
    if top == 0:
        return 0.0
    return top * math.sqrt(math.fsum((e / top) ** 2 for e in errors) / len(errors))


def score(estimates: Iterable[HomeEstimate], truth: Mapping[str, Tuple[float, float]],
          thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> ValidationReport:
    """Per-user haversine errors plus MAE/RMSE/median/hit rates.

    Users lacking either a detected home or a truth entry count as missing and
    are left out of the aggregates.
    """
    if any(not t > 0 for t in thresholds):
        raise ValueError("thresholds must be positive")
    by_user = {e.user_id: e for e in estimates}
    users = sorted(set(by_user) | set(truth))
    records, missing = [], []
    for uid in users:
        est = by_user.get(uid)
        if est is None or not est.detected or uid not in truth:
            missing.append(uid)
            continue
        tlat, tlon = truth[uid]
        err = haversine_m(est.home_lat, est.home_lon, tlat, tlon)
        records.append(ValidationRecord(uid, est.home_lat, est.home_lon, tlat, tlon, err))
    if not records:
        raise NoEvaluableUsers("no user has both an estimate and a ground-truth home")
    errors = [r.error_m for r in records]
    hits = {float(t): sum(e <= t for e in errors) / len(errors) for t in thresholds}
    return ValidationReport(
        records=tuple(records),
        mae_m=mae(errors),
        rmse_m=rmse(errors),
        median_m=statistics.median(errors),
        hit_rates=hits,
        n_evaluated=len(records),
        n_missing=len(missing),
        missing_users=tuple(missing),
    )


def load_ground_truth(path) -> Dict[str, Tuple[float, float]]:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    truth: Dict[str, Tuple[float, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"user_id", "latitude", "longitude"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: ground truth lacks columns {sorted(missing)}")
        for row in reader:
            uid = row["user_id"].strip()
            if uid in truth:
                raise DuplicateUser(f"{path}: user {uid!r} appears more than once")
            lat, lon = float(row["latitude"]), float(row["longitude"])
            if not (-90 <= lat <= 90):
                raise CoordinateOutOfRange("lat", f"{path}: latitude {lat} for {uid!r}")
            if not (-180 <= lon <= 180):
                raise CoordinateOutOfRange("lon", f"{path}: longitude {lon} for {uid!r}")
            truth[uid] = (lat, lon)
    return truth


def write_ground_truth(path, truth: Mapping[str, Tuple[float, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "latitude", "longitude"])
        for uid in sorted(truth):
            lat, lon = truth[uid]
            w.writerow([uid, f"{lat:.7f}", f"{lon:.7f}"])


def write_report(report: ValidationReport, records_path, summary_path) -> None:
    with open(records_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "predicted_lat", "predicted_lon", "true_lat", "true_lon", "error_m"])
        for r in report.records:
            w.writerow([r.user_id, f"{r.predicted_lat:.7f}", f"{r.predicted_lon:.7f}",
                        f"{r.true_lat:.7f}", f"{r.true_lon:.7f}", f"{r.error_m:.3f}"])
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(report.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
