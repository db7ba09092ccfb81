"""Local metric projection and great-circle distance.

All distances use a spherical earth of radius 6,371,000 m so that the plane
used for grid binning and the haversine used for scoring agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import GpsPoint, ProjectedPoint

EARTH_RADIUS_M = 6_371_000.0
_DEG = math.pi / 180.0


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class LocalProjection:
    """Equirectangular tangent plane centred on ``(origin_lat, origin_lon)``."""

    origin_lat: float
    origin_lon: float
    earth_radius: float = EARTH_RADIUS_M

    def __post_init__(self):
        if not (-90.0 <= self.origin_lat <= 90.0 and -180.0 <= self.origin_lon <= 180.0):
            raise ValueError("projection origin out of bounds")

    @property
    def _kx(self) -> float:
        return self.earth_radius * math.cos(self.origin_lat * _DEG) * _DEG

    @property
    def _ky(self) -> float:
        return self.earth_radius * _DEG

    def forward(self, lat, lon):
        """Degrees to metres. Works on scalars and numpy arrays."""
        x = self._kx * (np.asarray(lon, dtype=float) - self.origin_lon)
        y = self._ky * (np.asarray(lat, dtype=float) - self.origin_lat)
        if np.ndim(x) == 0:
            return float(x), float(y)
        return x, y

    def inverse(self, x, y):
        """Metres to degrees; returns ``(lat, lon)``."""
        lat = self.origin_lat + np.asarray(y, dtype=float) / self._ky
        lon = self.origin_lon + np.asarray(x, dtype=float) / self._kx
        if np.ndim(lat) == 0:
            return float(lat), float(lon)
        return lat, lon


def make_projection(points: Sequence[GpsPoint]) -> LocalProjection:
    if len(points) == 0:
        raise EmptyInput("cannot build a projection from zero points")
    lat = math.fsum(p.lat for p in points) / len(points)
    lon = math.fsum(p.lon for p in points) / len(points)
    return LocalProjection(lat, lon)


def project_forward(p: GpsPoint, proj: LocalProjection, source_index: int = 0) -> ProjectedPoint:
    x, y = proj.forward(p.lat, p.lon)
    return ProjectedPoint(x, y, p.timestamp, source_index)


def project_inverse(q: ProjectedPoint, proj: LocalProjection):
    return proj.inverse(q.x, q.y)


def project_all(points: Sequence[GpsPoint], proj: LocalProjection) -> list:
    return [project_forward(p, proj, i) for i, p in enumerate(points)]


def project_xy(points: Sequence[GpsPoint], proj: LocalProjection) -> np.ndarray:
    """Projected coordinates as an ``(n, 2)`` array."""
    lat = np.fromiter((p.lat for p in points), dtype=float, count=len(points))
    lon = np.fromiter((p.lon for p in points), dtype=float, count=len(points))
    x, y = proj.forward(lat, lon)
    return np.column_stack([np.atleast_1d(x), np.atleast_1d(y)]).reshape(len(points), 2)


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    phi1, phi2 = lat1 * _DEG, lat2 * _DEG
    dphi = (lat2 - lat1) * _DEG
    dlmb = (lon2 - lon1) * _DEG
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))
