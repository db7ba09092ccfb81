"""Shared domain types and record-level validation."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Mapping, Optional, Sequence

ALGORITHMS = ("ghost", "a1", "a2", "dbscan", "kmeanspp", "frequency")
INFERENCE_SOURCES = ("night", "weekend", "none")
REFINEMENT_METHODS = (
    "densest_bin_centroid",
    "mean_cell_points",
    "grid_centroid",
    "not_applicable",
)


class RecordRejected(ValueError):
    """A raw record could not be turned into a GpsPoint."""

    kind = "rejected"

    def __init__(self, field_name: str, message: str = ""):
        self.field_name = field_name
        super().__init__(message or f"{self.kind}: {field_name}")


class MissingField(RecordRejected):
    kind = "MissingField"


class UnparseableTimestamp(RecordRejected):
    kind = "UnparseableTimestamp"


class CoordinateOutOfRange(RecordRejected):
    kind = "CoordinateOutOfRange"


class InvalidParams(ValueError):
    pass


_TS_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2}):(\d{2})(?:\.(\d{1,9}))?"
    r"(Z|[+-]\d{2}:\d{2})?$"
)


def parse_timestamp(text: str) -> datetime:
    """Parse RFC 3339 or ``YYYY-MM-DD HH:MM:SS``.

    Strings without a zone designator come back naive (wall clock, used as-is);
    ``Z`` and ``+HH:MM`` offsets come back timezone-aware.
    """
    m = _TS_RE.match(text.strip())
    if m is None:
        raise UnparseableTimestamp("timestamp", f"unparseable timestamp {text!r}")
    year, month, day, hh, mm, ss = (int(g) for g in m.groups()[:6])
    frac, zone = m.group(7), m.group(8)
    micro = int((frac or "0").ljust(6, "0")[:6])
    tz = None
    if zone == "Z":
        tz = timezone.utc
    elif zone:
        sign = 1 if zone[0] == "+" else -1
        offset = timedelta(hours=int(zone[1:3]), minutes=int(zone[4:6]))
        tz = timezone(sign * offset)
    try:
        return datetime(year, month, day, hh, mm, ss, micro, tzinfo=tz)
    except ValueError as exc:
        raise UnparseableTimestamp("timestamp", str(exc)) from None


def format_timestamp(ts: datetime) -> str:
    """Inverse of :func:`parse_timestamp` (lossless)."""
    text = ts.strftime("%Y-%m-%dT%H:%M:%S")
    if ts.microsecond:
        text += f".{ts.microsecond:06d}"
    off = ts.utcoffset()
    if off is not None:
        if off == timedelta(0):
            text += "Z"
        else:
            minutes = int(off.total_seconds() // 60)
            sign = "+" if minutes >= 0 else "-"
            minutes = abs(minutes)
            text += f"{sign}{minutes // 60:02d}:{minutes % 60:02d}"
    return text


_EPOCH = datetime(1970, 1, 1)


def wall_seconds(ts: datetime) -> float:
    """Seconds since the epoch of the wall-clock reading, ignoring any offset."""
    delta = ts.replace(tzinfo=None) - _EPOCH
    return delta.days * 86400 + delta.seconds + delta.microseconds / 1e6


@dataclass(frozen=True)
class GpsPoint:
    user_id: str
    timestamp: datetime
    lat: float
    lon: float

    def __post_init__(self):
        if not self.user_id:
            raise MissingField("user_id")
        if not (math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise CoordinateOutOfRange("lat", f"latitude {self.lat} out of range")
        if not (math.isfinite(self.lon) and -180.0 <= self.lon <= 180.0):
            raise CoordinateOutOfRange("lon", f"longitude {self.lon} out of range")

    @property
    def hour(self) -> int:
        return self.timestamp.hour

    @property
    def weekday(self) -> int:
        """Monday is 0, Sunday is 6."""
        return self.timestamp.weekday()

    @property
    def date(self) -> date:
        return self.timestamp.date()

    @property
    def epoch(self) -> float:
        """Absolute seconds; naive timestamps are read as UTC."""
        if self.timestamp.tzinfo is None:
            return wall_seconds(self.timestamp)
        return self.timestamp.timestamp()

    def to_record(self) -> dict:
        return {
            "user_id": self.user_id,
            "timestamp": format_timestamp(self.timestamp),
            "latitude": repr(self.lat),
            "longitude": repr(self.lon),
        }


@dataclass(frozen=True)
class UserTrajectory:
    user_id: str
    points: tuple

    def __post_init__(self):
        for p in self.points:
            if p.user_id != self.user_id:
                raise ValueError(f"point for {p.user_id!r} in trajectory {self.user_id!r}")

    @classmethod
    def from_points(cls, user_id: str, points) -> "UserTrajectory":
        # sorted() is stable, so equal timestamps keep their input order
        return cls(user_id, tuple(sorted(points, key=lambda p: p.epoch)))

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class ProjectedPoint:
    x: float
    y: float
    timestamp: datetime
    source_index: int


@dataclass(frozen=True)
class CellStats:
    cell_x: float
    cell_y: float
    stay_time: float
    unique_nights: int
    total_points: int


@dataclass(frozen=True)
class HomeEstimate:
    user_id: str
    algorithm: str
    inference_source: str = "none"
    home_lat: Optional[float] = None
    home_lon: Optional[float] = None
    refinement_method: str = "not_applicable"
    winning_cell: Optional[CellStats] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.inference_source not in INFERENCE_SOURCES:
            raise ValueError(f"unknown inference source {self.inference_source!r}")
        has_coords = self.home_lat is not None and self.home_lon is not None
        if has_coords != (self.inference_source != "none"):
            raise ValueError("home coordinates must be present iff a source was found")
        if self.algorithm != "ghost" and self.refinement_method != "not_applicable":
            raise ValueError("refinement_method only applies to ghost")

    @property
    def detected(self) -> bool:
        return self.inference_source != "none"


@dataclass(frozen=True)
class A1Params:
    bandwidth_m: float = 20.0


@dataclass(frozen=True)
class A2Params:
    stay_dist_m: float = 50.0
    stay_time_min: float = 10.0
    region_radius_m: float = 50.0


@dataclass(frozen=True)
class DbscanParams:
    eps_m: float = 20.0
    min_pts: int = 4


@dataclass(frozen=True)
class KmeansParams:
    k: int = 1
    random_state: int = 42
    n_init: int = 10


@dataclass(frozen=True)
class DetectionParams:
    grid_size: float = 50.0
    night_start_hour: int = 22
    night_end_hour: int = 6
    weekend_start_hour: int = 8
    weekend_end_hour: int = 20
    weekend_days: frozenset = frozenset({5, 6})
    a1: A1Params = field(default_factory=A1Params)
    a2: A2Params = field(default_factory=A2Params)
    dbscan: DbscanParams = field(default_factory=DbscanParams)
    kmeans: KmeansParams = field(default_factory=KmeansParams)

    def __post_init__(self):
        object.__setattr__(self, "weekend_days", frozenset(self.weekend_days))
        for name in ("night_start_hour", "night_end_hour", "weekend_start_hour", "weekend_end_hour"):
            h = getattr(self, name)
            if isinstance(h, bool) or not isinstance(h, int) or not 0 <= h <= 23:
                raise InvalidParams(f"{name} must be an integer in [0, 23], got {h!r}")
        if not self.weekend_days <= set(range(7)):
            raise InvalidParams(f"weekend_days must be within 0..6, got {sorted(self.weekend_days)}")
        positive = {
            "grid_size": self.grid_size,
            "a1.bandwidth_m": self.a1.bandwidth_m,
            "a2.stay_dist_m": self.a2.stay_dist_m,
            "a2.stay_time_min": self.a2.stay_time_min,
            "a2.region_radius_m": self.a2.region_radius_m,
            "dbscan.eps_m": self.dbscan.eps_m,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise InvalidParams(f"{name} must be strictly positive, got {value!r}")
        if self.dbscan.min_pts < 1:
            raise InvalidParams("dbscan.min_pts must be >= 1")
        if self.kmeans.k < 1:
            raise InvalidParams("kmeans.k must be >= 1")
        if self.kmeans.n_init < 1:
            raise InvalidParams("kmeans.n_init must be >= 1")


@dataclass(frozen=True)
class ValidationRecord:
    user_id: str
    predicted_lat: float
    predicted_lon: float
    true_lat: float
    true_lon: float
    error_m: float


REQUIRED_FIELDS = ("user_id", "timestamp", "latitude", "longitude")


def _coordinate(raw: Mapping[str, str], name: str, short: str) -> float:
    try:
        value = float(raw[name])
    except ValueError:
        raise CoordinateOutOfRange(short, f"{name} {raw[name]!r} is not a number") from None
    return value


def validate_point(raw: Mapping[str, str]) -> GpsPoint:
    """Build a GpsPoint from a raw string record.

    Raises a :class:`RecordRejected` subclass naming the offending field.
    """
    for name in REQUIRED_FIELDS:
        value = raw.get(name)
        if value is None or str(value).strip() == "":
            raise MissingField(name)
    ts = parse_timestamp(str(raw["timestamp"]))
    lat = _coordinate(raw, "latitude", "lat")
    lon = _coordinate(raw, "longitude", "lon")
    return GpsPoint(str(raw["user_id"]).strip(), ts, lat, lon)


def group_by_user(points: Sequence[GpsPoint]) -> list:
    """Group points into trajectories, ordered by user_id."""
    by_user: dict = {}
    for p in points:
        by_user.setdefault(p.user_id, []).append(p)
    return [UserTrajectory.from_points(uid, by_user[uid]) for uid in sorted(by_user)]
