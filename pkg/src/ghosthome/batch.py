"""Per-user dispatch and (optionally parallel) batch detection."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Sequence

from . import baselines
from .ghost import detect_home
from .model import DetectionParams, HomeEstimate, UserTrajectory

log = logging.getLogger(__name__)

DETECTORS: Dict[str, Callable[[UserTrajectory, DetectionParams], HomeEstimate]] = {
    "ghost": detect_home,
    "a1": baselines.a1_detect,
    "a2": baselines.a2_detect,
    "dbscan": baselines.dbscan_detect,
    "kmeanspp": baselines.kmeanspp_detect,
    "frequency": baselines.frequency_detect,
}


def run_detector(algorithm: str, t: UserTrajectory, params: DetectionParams) -> HomeEstimate:
    """Detector errors on a single user become an undetected estimate."""
    try:
        return DETECTORS[algorithm](t, params)
    except baselines.DetectionError as exc:
        log.warning("%s failed for user %s: %s", algorithm, t.user_id, exc)
        return HomeEstimate(t.user_id, algorithm, "none")


def _run_one(args):
    return run_detector(*args)


def detect_batch(trajectories: Sequence[UserTrajectory], algorithm: str,
                 params: DetectionParams, workers: int = 1) -> List[HomeEstimate]:
    """Estimates for every user, sorted by user_id regardless of ``workers``."""
    if algorithm not in DETECTORS:
        raise KeyError(f"unknown algorithm {algorithm!r}")
    ordered = sorted(trajectories, key=lambda t: t.user_id)
    tasks = [(algorithm, t, params) for t in ordered]
    if workers <= 1 or len(tasks) <= 1:
        return [_run_one(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
