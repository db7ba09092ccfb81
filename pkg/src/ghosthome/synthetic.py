"""Seeded trajectories with planted home locations.

Each simulated user sleeps at home (night pings), commutes to a work place a
fixed distance away for office hours, and is otherwise at home. Every
scheduled ping is dropped independently with probability ``dropout``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Dict, List, Tuple

from .geo import LocalProjection
from .model import GpsPoint, UserTrajectory
from .rng import SplitMix64
from .temporal import HourWindow, in_window

# Greater Boston, roughly
HOME_LAT_RANGE = (42.25, 42.45)
HOME_LON_RANGE = (-71.20, -70.95)


@dataclass(frozen=True)
class SynthSpec:
    n_users: int = 50
    days: int = 14
    sigma_m: float = 10.0
    work_offset_m: float = 2000.0
    night_rate: int = 6
    day_rate: int = 12
    dropout: float = 0.52
    seed: int = 7
    start: date = date(2025, 6, 16)  # a Monday
    night_start_hour: int = 22
    night_end_hour: int = 6
    work_start_hour: int = 9
    work_end_hour: int = 17

    def __post_init__(self):
        if self.n_users < 0 or self.days < 0:
            raise ValueError("n_users and days must be non-negative")
        if self.night_rate < 0 or self.day_rate < 0:
            raise ValueError("ping rates must be >= 0")
        if self.sigma_m < 0:
            raise ValueError("sigma_m must be >= 0")
        if not 0.0 <= self.dropout <= 1.0:
            raise ValueError("dropout must be in [0, 1]")

    @property
    def night_window(self) -> HourWindow:
        return HourWindow(self.night_start_hour, self.night_end_hour)

    def scheduled_pings_per_user(self) -> int:
        night_hours = sum(in_window(h, self.night_window) for h in range(24))
        return self.days * (night_hours * self.night_rate + (24 - night_hours) * self.day_rate)


def _user_id(i: int) -> str:
    return f"user{i:03d}"


def generate_user(spec: SynthSpec, index: int) -> Tuple[UserTrajectory, Tuple[float, float]]:
    rng = SplitMix64(spec.seed ^ index)
    uid = _user_id(index)
    home_lat = HOME_LAT_RANGE[0] + rng.random() * (HOME_LAT_RANGE[1] - HOME_LAT_RANGE[0])
    home_lon = HOME_LON_RANGE[0] + rng.random() * (HOME_LON_RANGE[1] - HOME_LON_RANGE[0])
    bearing = 2.0 * math.pi * rng.random()
    frame = LocalProjection(home_lat, home_lon)
    work_xy = (spec.work_offset_m * math.sin(bearing), spec.work_offset_m * math.cos(bearing))

    night = spec.night_window
    points: List[GpsPoint] = []
    for d in range(spec.days):
        day0 = datetime.combine(spec.start + timedelta(days=d), datetime.min.time())
        for hour in range(24):
            at_night = in_window(hour, night)
            rate = spec.night_rate if at_night else spec.day_rate
            at_work = not at_night and spec.work_start_hour <= hour < spec.work_end_hour
            cx, cy = work_xy if at_work else (0.0, 0.0)
            for k in range(rate):
                offset_s = (k + rng.random()) * 3600.0 / rate
                dropped = rng.random() < spec.dropout
                dx = spec.sigma_m * rng.gauss()
                dy = spec.sigma_m * rng.gauss()
                if dropped:
                    continue
                lat, lon = frame.inverse(cx + dx, cy + dy)
                ts = day0 + timedelta(hours=hour, microseconds=round(offset_s * 1e6))
                points.append(GpsPoint(uid, ts.replace(microsecond=0), lat, lon))
    return UserTrajectory.from_points(uid, points), (home_lat, home_lon)


def generate(spec: SynthSpec = SynthSpec()) -> Tuple[List[UserTrajectory], Dict[str, Tuple[float, float]]]:
    """All users of ``spec`` plus the map of planted homes."""
    trajectories, truth = [], {}
    for i in range(spec.n_users):
        t, home = generate_user(spec, i)
        trajectories.append(t)
        truth[t.user_id] = home
    return trajectories, truth
