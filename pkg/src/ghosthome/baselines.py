"""Comparison detectors: mean-shift (A1), stay-point regions (A2), DBSCAN,
K-Means++ and most-frequent-coordinate.

Every detector takes ``(trajectory, DetectionParams)`` and returns a
HomeEstimate, like :func:`ghosthome.ghost.detect_home`. None of them use the
weekend fallback.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .geo import make_projection, project_xy
from .model import DetectionParams, HomeEstimate, UserTrajectory, wall_seconds
from .rng import SplitMix64
from .temporal import HourWindow, filter_night, night_window

NOISE = -1


class DetectionError(ValueError):
    pass


class KExceedsPoints(DetectionError):
    pass


@dataclass(frozen=True)
class Cluster:
    center: Tuple[float, float]
    member_indices: Tuple[int, ...]


@dataclass(frozen=True)
class StayPoint:
    center: Tuple[float, float]
    arrival: float
    departure: float
    anchor: int
    members: Tuple[int, ...]

    @property
    def dwell(self) -> float:
        return self.departure - self.arrival


@dataclass(frozen=True)
class StayRegion:
    centroid: Tuple[float, float]
    stay_points: Tuple[StayPoint, ...]
    night_dwell: float
    total_dwell: float


def _none(t: UserTrajectory, algorithm: str) -> HomeEstimate:
    return HomeEstimate(t.user_id, algorithm, "none")


def _estimate(t, algorithm, proj, x, y) -> HomeEstimate:
    lat, lon = proj.inverse(x, y)
    return HomeEstimate(t.user_id, algorithm, "night", lat, lon)


def _night_xy(t: UserTrajectory, p: DetectionParams):
    night = filter_night(t, night_window(p))
    if not night:
        return None, None
    proj = make_projection(t.points)
    return proj, project_xy(night, proj)


def _smallest_yx(candidates):
    """Index of the (y, x)-smallest entry among ``(index, (x, y))`` pairs."""
    return min(candidates, key=lambda c: (c[1][1], c[1][0]))[0]


# -- A1: flat-kernel mean shift ----------------------------------------------


def mean_shift(xy: np.ndarray, bandwidth: float, tol: float = 1e-3, max_iter: int = 300):
    """Flat-kernel mean shift seeded at every point.

    Returns ``(modes, labels)`` where ``modes`` are the merged modes ordered by
    basin size and ``labels`` assigns each point to its nearest mode.
    """
    xy = np.asarray(xy, dtype=float)
    r2 = bandwidth * bandwidth
    # identical seeds follow identical paths
    seeds = np.unique(xy, axis=0)
    converged = np.empty_like(seeds)
    for start in range(0, len(seeds), 256):
        s = seeds[start:start + 256].copy()
        active = np.ones(len(s), dtype=bool)
        for _ in range(max_iter):
            if not active.any():
                break
            cur = s[active]
            d2 = ((cur[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
            within = d2 <= r2
            new = (within @ xy) / within.sum(axis=1)[:, None]
            shift = np.sqrt(((new - cur) ** 2).sum(axis=1))
            s[active] = new
            idx = np.flatnonzero(active)
            active[idx[shift < tol]] = False
        converged[start:start + 256] = s

    d2 = ((converged[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
    basin = (d2 <= r2).sum(axis=1)
    order = sorted(range(len(converged)), key=lambda i: (-basin[i], converged[i, 1], converged[i, 0]))
    kept: List[np.ndarray] = []
    for i in order:
        m = converged[i]
        if all(((m - k) ** 2).sum() >= r2 for k in kept):
            kept.append(m)
    modes = np.array(kept)
    dist = ((xy[:, None, :] - modes[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(dist, axis=1)
    return modes, labels


def a1_detect(t: UserTrajectory, p: DetectionParams = DetectionParams()) -> HomeEstimate:
    proj, xy = _night_xy(t, p)
    if xy is None:
        return _none(t, "a1")
    modes, labels = mean_shift(xy, p.a1.bandwidth_m)
    counts = np.bincount(labels, minlength=len(modes))
    top = counts.max()
    best = _smallest_yx([(i, tuple(modes[i])) for i in range(len(modes)) if counts[i] == top])
    return _estimate(t, "a1", proj, float(modes[best, 0]), float(modes[best, 1]))


# -- A2: stay points and stay regions ------------------------------------------


def extract_stay_points(xy: np.ndarray, times: np.ndarray, stay_dist_m: float,
                        stay_time_s: float) -> List[StayPoint]:
    """Sequential anchor-based stay-point extraction.

    From anchor i, extend j while point j stays within ``stay_dist_m`` of the
    anchor. A run lasting at least ``stay_time_s`` becomes a stay point and
    the scan resumes after it.
    """
    n = len(xy)
    r2 = stay_dist_m * stay_dist_m
    xs, ys, ts = xy[:, 0].tolist(), xy[:, 1].tolist(), list(times)
    out = []
    i = 0
    while i < n:
        j = i + 1
        while j < n and (xs[j] - xs[i]) ** 2 + (ys[j] - ys[i]) ** 2 <= r2:
            j += 1
        if ts[j - 1] - ts[i] >= stay_time_s:
            center = xy[i:j].mean(axis=0)
            out.append(StayPoint((float(center[0]), float(center[1])),
                                 float(times[i]), float(times[j - 1]), i, tuple(range(i, j))))
            i = j
        else:
            i += 1
    return out


def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def single_linkage(centers: np.ndarray, cutoff: float) -> List[List[int]]:
    """Connected components under the relation ``distance <= cutoff``.

    Components are ordered by their smallest member index.
    """
    n = len(centers)
    parent = list(range(n))
    c2 = cutoff * cutoff
    for i in range(n):
        d2 = ((centers[i + 1:] - centers[i]) ** 2).sum(axis=1)
        for j in np.flatnonzero(d2 <= c2) + i + 1:
            ri, rj = _find(parent, i), _find(parent, int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(_find(parent, i), []).append(i)
    return [groups[k] for k in sorted(groups)]


def night_overlap(start: float, end: float, w: HourWindow) -> float:
    """Seconds of ``[start, end]`` (wall-clock epoch seconds) inside the window."""
    if end <= start:
        return 0.0
    if w.full_day:
        return end - start
    total = 0.0
    first = math.floor(start / 86400.0) - 1
    last = math.floor(end / 86400.0)
    for day in range(first, last + 1):
        s = day * 86400.0 + w.start_hour * 3600.0
        e = (day + 1 if w.wraps else day) * 86400.0 + w.end_hour * 3600.0
        total += max(0.0, min(end, e) - max(start, s))
    return total


def stay_regions(stays: List[StayPoint], region_radius_m: float, w: HourWindow) -> List[StayRegion]:
    if not stays:
        return []
    centers = np.array([s.center for s in stays])
    regions = []
    for members in single_linkage(centers, region_radius_m):
        sps = tuple(stays[i] for i in members)
        c = centers[members].mean(axis=0)
        regions.append(StayRegion(
            centroid=(float(c[0]), float(c[1])),
            stay_points=sps,
            night_dwell=math.fsum(night_overlap(s.arrival, s.departure, w) for s in sps),
            total_dwell=math.fsum(s.dwell for s in sps),
        ))
    return regions


NIGHT_DWELL_MIN_S = 3 * 3600.0
TOTAL_DWELL_MIN_S = 24 * 3600.0


def a2_detect(t: UserTrajectory, p: DetectionParams = DetectionParams()) -> HomeEstimate:
    if len(t.points) == 0:
        return _none(t, "a2")
    proj = make_projection(t.points)
    xy = project_xy(t.points, proj)
    times = np.array([wall_seconds(q.timestamp) for q in t.points])
    stays = extract_stay_points(xy, times, p.a2.stay_dist_m, p.a2.stay_time_min * 60.0)
    regions = stay_regions(stays, p.a2.region_radius_m, night_window(p))
    candidates = [r for r in regions
                  if r.night_dwell >= NIGHT_DWELL_MIN_S or r.total_dwell >= TOTAL_DWELL_MIN_S]
    if not candidates:
        return _none(t, "a2")
    home = min(candidates, key=lambda r: (-r.night_dwell, -r.total_dwell, r.centroid[1], r.centroid[0]))
    return _estimate(t, "a2", proj, *home.centroid)


# -- DBSCAN ----------------------------------------------------------------------


def _neighbours(xy: np.ndarray, eps: float) -> List[np.ndarray]:
    """Indices within ``eps`` of each point (itself included), via a uniform
    grid of side ``eps``."""
    e2 = eps * eps
    keys = np.floor(xy / eps).astype(np.int64)
    buckets: dict = {}
    for i, (kx, ky) in enumerate(map(tuple, keys)):
        buckets.setdefault((kx, ky), []).append(i)
    buckets = {k: np.array(v) for k, v in buckets.items()}
    out = []
    for i, (kx, ky) in enumerate(map(tuple, keys)):
        cand = [buckets[(kx + dx, ky + dy)] for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                if (kx + dx, ky + dy) in buckets]
        cand = np.sort(np.concatenate(cand))
        d2 = ((xy[cand] - xy[i]) ** 2).sum(axis=1)
        out.append(cand[d2 <= e2])
    return out


def dbscan_labels(xy: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Classic DBSCAN; noise is labelled -1 and clusters are numbered in
    discovery order. ``min_pts`` counts the point itself."""
    xy = np.asarray(xy, dtype=float)
    n = len(xy)
    if n == 0:
        return np.empty(0, dtype=int)
    nbrs = _neighbours(xy, eps)
    core = np.array([len(nb) >= min_pts for nb in nbrs])
    unvisited = -2
    labels = np.full(n, unvisited, dtype=int)
    cluster = 0
    for i in range(n):
        if labels[i] != unvisited:
            continue
        if not core[i]:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            nb = nbrs[queue.popleft()]
            lab = labels[nb]
            # earlier noise becomes a border point of this cluster
            labels[nb[lab == NOISE]] = cluster
            fresh = nb[lab == unvisited]
            labels[fresh] = cluster
            queue.extend(fresh[core[fresh]].tolist())
        cluster += 1
    return labels


def clusters_from_labels(xy: np.ndarray, labels: np.ndarray) -> List[Cluster]:
    out = []
    for c in range(labels.max() + 1 if len(labels) else 0):
        members = np.flatnonzero(labels == c)
        if len(members):
            center = xy[members].mean(axis=0)
            out.append(Cluster((float(center[0]), float(center[1])), tuple(members.tolist())))
    return out


def _largest_cluster(clusters: List[Cluster]) -> Cluster:
    top = max(len(c.member_indices) for c in clusters)
    ties = [(i, c.center) for i, c in enumerate(clusters) if len(c.member_indices) == top]
    return clusters[_smallest_yx(ties)]


def dbscan_detect(t: UserTrajectory, p: DetectionParams = DetectionParams()) -> HomeEstimate:
    proj, xy = _night_xy(t, p)
    if xy is None:
        return _none(t, "dbscan")
    labels = dbscan_labels(xy, p.dbscan.eps_m, p.dbscan.min_pts)
    clusters = clusters_from_labels(xy, labels)
    if not clusters:
        return _none(t, "dbscan")
    best = _largest_cluster(clusters)
    return _estimate(t, "dbscan", proj, *best.center)


# -- K-Means++ ---------------------------------------------------------------------


def _sq_dists(xy, centroids):
    return ((xy[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def kmeanspp_seed(xy: np.ndarray, k: int, rng: SplitMix64) -> np.ndarray:
    n = len(xy)
    chosen = [rng.randbelow(n)]
    d2 = ((xy - xy[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        total = float(d2.sum())
        if total <= 0.0:
            idx = rng.randbelow(n)
        else:
            target = rng.random() * total
            idx = min(int(np.searchsorted(np.cumsum(d2), target, side="right")), n - 1)
        chosen.append(idx)
        d2 = np.minimum(d2, ((xy - xy[idx]) ** 2).sum(axis=1))
    return xy[chosen].copy()


def lloyd(xy: np.ndarray, centroids: np.ndarray, max_iter: int = 300):
    k = len(centroids)
    labels = np.argmin(_sq_dists(xy, centroids), axis=1)
    for _ in range(max_iter):
        counts = np.bincount(labels, minlength=k)
        sums = np.stack([np.bincount(labels, weights=xy[:, 0], minlength=k),
                         np.bincount(labels, weights=xy[:, 1], minlength=k)], axis=1)
        filled = counts > 0
        # an emptied cluster keeps its previous centroid
        centroids = centroids.copy()
        centroids[filled] = sums[filled] / counts[filled, None]
        new_labels = np.argmin(_sq_dists(xy, centroids), axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(_sq_dists(xy, centroids)[np.arange(len(xy)), labels].sum())
    return centroids, labels, inertia


def kmeanspp(xy: np.ndarray, k: int, random_state: int = 42, n_init: int = 10, max_iter: int = 300):
    """Best-of-``n_init`` K-Means++ / Lloyd. Returns ``(centroids, labels, inertia)``.

    One SplitMix64 stream seeded with ``random_state`` feeds all restarts in
    order; equal inertia keeps the earlier restart.
    """
    xy = np.asarray(xy, dtype=float)
    if k > len(xy):
        raise KExceedsPoints(f"k={k} exceeds {len(xy)} points")
    rng = SplitMix64(random_state)
    best = None
    for _ in range(n_init):
        result = lloyd(xy, kmeanspp_seed(xy, k, rng), max_iter)
        if best is None or result[2] < best[2]:
            best = result
    return best


def kmeanspp_detect(t: UserTrajectory, p: DetectionParams = DetectionParams()) -> HomeEstimate:
    proj, xy = _night_xy(t, p)
    if xy is None:
        return _none(t, "kmeanspp")
    centroids, labels, _ = kmeanspp(xy, p.kmeans.k, p.kmeans.random_state, p.kmeans.n_init)
    counts = np.bincount(labels, minlength=len(centroids))
    top = counts.max()
    best = _smallest_yx([(i, tuple(centroids[i])) for i in range(len(centroids)) if counts[i] == top])
    return _estimate(t, "kmeanspp", proj, float(centroids[best, 0]), float(centroids[best, 1]))


# -- most frequent coordinate ------------------------------------------------------


def most_frequent_coordinate(points, decimals: int = 6) -> Optional[Tuple[float, float]]:
    """Modal ``(lat, lon)`` after rounding; ties go to the earliest first sighting."""
    counts: dict = {}
    for q in points:
        key = (round(q.lat, decimals), round(q.lon, decimals))
        counts[key] = counts.get(key, 0) + 1
    if not counts:
        return None
    # dicts keep insertion order, i.e. first-occurrence order for time-sorted input
    return max(counts, key=counts.get)


def frequency_detect(t: UserTrajectory, p: DetectionParams = DetectionParams()) -> HomeEstimate:
    night = filter_night(t, night_window(p))
    mode = most_frequent_coordinate(night)
    if mode is None:
        return _none(t, "frequency")
    return HomeEstimate(t.user_id, "frequency", "night", mode[0], mode[1])
