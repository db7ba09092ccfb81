"""Brute-force reference implementations shared by the unit and acceptance tests.

They deliberately avoid the package's own helpers.
"""

from datetime import datetime, timedelta
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from ghosthome.model import ProjectedPoint


def oracle_cell(x, y, g):
    def r(v):
        return int(Decimal(v).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    return r(y / g), r(x / g)


def oracle_home(points, g):
    """O(n^2): for every point rescan all points to build its cell's stats."""
    keys = [oracle_cell(p.x, p.y, g) for p in points]
    best_rank, best_key = None, None
    for k in keys:
        members = [points[j] for j in range(len(points)) if keys[j] == k]
        times = [m.timestamp for m in members]
        rank = ((max(times) - min(times)).total_seconds(),
                len({m.timestamp.date() for m in members}),
                len(members))
        if best_rank is None or rank > best_rank or (rank == best_rank and k < best_key):
            best_rank, best_key = rank, k
    return best_key, best_rank


def random_instance(rng, n_max=200):
    n = rng.randint(1, n_max)
    g = rng.choice([1.0, 5.0, 10.0, 20.0, 50.0, 150.0])
    base = datetime(2025, 6, 1)
    pts = []
    for i in range(n):
        # coarse lattice so exact half-cell boundaries show up often
        x = rng.randint(-40, 40) * g / 4
        y = rng.randint(-40, 40) * g / 4
        ts = base + timedelta(minutes=rng.randint(0, 60 * 24 * 10))
        pts.append(ProjectedPoint(x, y, ts, i))
    return pts, g


def reference_dbscan(xy, eps, min_pts):
    """O(n^2) DBSCAN: core graph components ordered by smallest core index;
    a border point joins the earliest component among its core neighbours."""
    n = len(xy)
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
    adj = d2 <= eps * eps
    core = adj.sum(axis=1) >= min_pts
    comp = [-1] * n
    next_id = 0
    for i in range(n):
        if core[i] and comp[i] == -1:
            stack = [i]
            comp[i] = next_id
            while stack:
                a = stack.pop()
                for b in np.flatnonzero(adj[a] & core):
                    if comp[b] == -1:
                        comp[b] = next_id
                        stack.append(b)
            next_id += 1
    labels = np.full(n, -1)
    for i in range(n):
        if core[i]:
            labels[i] = comp[i]
        else:
            owners = [comp[j] for j in np.flatnonzero(adj[i] & core)]
            if owners:
                labels[i] = min(owners)
    return labels


def same_partition(a, b):
    if not np.array_equal(a == -1, b == -1):
        return False
    mapping = {}
    for x, y in zip(a, b):
        if x != -1 and mapping.setdefault(x, y) != y:
            return False
    return len(set(mapping.values())) == len(mapping)


def random_cloud(rng, n_max=500):
    n = rng.integers(1, n_max + 1)
    k = rng.integers(1, 6)
    centres = rng.uniform(-300, 300, size=(k, 2))
    xy = centres[rng.integers(0, k, size=n)] + rng.normal(0, rng.uniform(3, 40), size=(n, 2))
    return xy
