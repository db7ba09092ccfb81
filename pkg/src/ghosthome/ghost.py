"""Grid-based home detection by longest stay-time."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

from .geo import make_projection, project_all
from .model import (
    CellStats,
    DetectionParams,
    HomeEstimate,
    ProjectedPoint,
    UserTrajectory,
    wall_seconds,
)
from .temporal import filter_night, filter_weekend, night_window, weekend_window


class NonPositiveGridSize(ValueError):
    pass


class EmptyCell(ValueError):
    pass


def round_half_away(v: float) -> int:
    """Round to nearest integer, halves away from zero."""
    return int(math.copysign(math.floor(abs(v) + 0.5), v))


@dataclass(frozen=True, order=True)
class GridKey:
    """Integer cell index; the cell centre sits at ``(ix * g, iy * g)``.

    Ordering is ``(iy, ix)``, i.e. by ``(cell_y, cell_x)`` for any positive g.
    """

    iy: int
    ix: int

    def center(self, g: float):
        return self.ix * g, self.iy * g


@dataclass(frozen=True)
class RefinementOutcome:
    x: float
    y: float
    method: str


def cell_of(x: float, y: float, g: float) -> GridKey:
    return GridKey(round_half_away(y / g), round_half_away(x / g))


def assign_cells(points: Sequence[ProjectedPoint], g: float) -> Dict[GridKey, List[ProjectedPoint]]:
    if not g > 0:
        raise NonPositiveGridSize(f"grid size must be > 0, got {g!r}")
    cells: Dict[GridKey, List[ProjectedPoint]] = {}
    for p in points:
        cells.setdefault(cell_of(p.x, p.y, g), []).append(p)
    return cells


def _epoch(ts) -> float:
    return ts.timestamp() if ts.tzinfo is not None else wall_seconds(ts)


def cell_stats(cells: Dict[GridKey, List[ProjectedPoint]], g: float) -> Dict[GridKey, CellStats]:
    out = {}
    for key, pts in cells.items():
        times = [_epoch(p.timestamp) for p in pts]
        cx, cy = key.center(g)
        out[key] = CellStats(
            cell_x=cx,
            cell_y=cy,
            stay_time=max(times) - min(times),
            unique_nights=len({p.timestamp.date() for p in pts}),
            total_points=len(pts),
        )
    return out


def select_home_cell(stats: Dict[GridKey, CellStats]) -> GridKey:
    """Maximise (stay_time, unique_nights, total_points); ties go to the
    smallest (cell_y, cell_x)."""
    if not stats:
        raise ValueError("no cells to select from")
    best = None
    for key in sorted(stats):
        s = stats[key]
        rank = (s.stay_time, s.unique_nights, s.total_points)
        if best is None or rank > best[0]:
            best = (rank, key)
    return best[1]


def bin_side(g: float) -> float:
    return max(3.0, g / 10.0)


def refine_in_cell(points_in_cell: Sequence[ProjectedPoint], key: GridKey, g: float) -> RefinementOutcome:
    n = len(points_in_cell)
    if n == 0:
        raise EmptyCell(f"cell {key} has no points")
    cx, cy = key.center(g)
    if n < 3:
        x = math.fsum(p.x for p in points_in_cell) / n
        y = math.fsum(p.y for p in points_in_cell) / n
        method = "mean_cell_points"
    else:
        side = bin_side(g)
        nbins = math.ceil(g / side)
        x0, y0 = cx - g / 2.0, cy - g / 2.0
        bins: Dict[tuple, list] = {}
        for p in points_in_cell:
            col = min(max(int(math.floor((p.x - x0) / side)), 0), nbins - 1)
            row = min(max(int(math.floor((p.y - y0) / side)), 0), nbins - 1)
            bins.setdefault((row, col), []).append(p)
        # most points wins; ties to the smallest (row, col)
        best = min(bins, key=lambda rc: (-len(bins[rc]), rc))
        members = bins[best]
        x = math.fsum(p.x for p in members) / len(members)
        y = math.fsum(p.y for p in members) / len(members)
        method = "densest_bin_centroid"
    if not (math.isfinite(x) and math.isfinite(y)):
        return RefinementOutcome(cx, cy, "grid_centroid")
    return RefinementOutcome(x, y, method)


def locate_home(projected: Sequence[ProjectedPoint], g: float):
    """Plane-level pipeline: cells, statistics, winning cell, refinement.

    Returns ``(home_key, stats, refinement)``.
    """
    cells = assign_cells(projected, g)
    stats = cell_stats(cells, g)
    home = select_home_cell(stats)
    return home, stats, refine_in_cell(cells[home], home, g)


def detect_home(t: UserTrajectory, p: DetectionParams = DetectionParams()) -> HomeEstimate:
    """Night-first home detection with weekend-daytime fallback."""
    none = HomeEstimate(t.user_id, "ghost", "none")
    if len(t.points) == 0:
        return none
    selected = filter_night(t, night_window(p))
    source = "night"
    if not selected:
        selected = filter_weekend(t, weekend_window(p), p.weekend_days)
        source = "weekend"
    if not selected:
        return none

    # origin from the whole trajectory so night and weekend runs share a frame
    proj = make_projection(t.points)
    projected = project_all(selected, proj)
    home, stats, refined = locate_home(projected, p.grid_size)
    lat, lon = proj.inverse(refined.x, refined.y)
    return HomeEstimate(
        user_id=t.user_id,
        algorithm="ghost",
        inference_source=source,
        home_lat=lat,
        home_lon=lon,
        refinement_method=refined.method,
        winning_cell=stats[home],
    )
