"""Night and weekend-daytime filtering on wall-clock hours."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class HourWindow:
    """Half-open hour interval ``[start_hour, end_hour)``, wrapping past midnight
    when ``start_hour > end_hour``. Equal bounds select the whole day."""

    start_hour: int
    end_hour: int

    def __post_init__(self):
        for h in (self.start_hour, self.end_hour):
            if not 0 <= h <= 23:
                raise ValueError(f"hour {h} outside [0, 23]")

    @property
    def wraps(self) -> bool:
        return self.start_hour > self.end_hour

    @property
    def full_day(self) -> bool:
        return self.start_hour == self.end_hour

    def complement(self) -> "HourWindow":
        return HourWindow(self.end_hour, self.start_hour)

    def __contains__(self, hour: int) -> bool:
        return in_window(hour, self)


def in_window(hour: int, w: HourWindow) -> bool:
    if w.full_day:
        return True
    if w.wraps:
        return hour >= w.start_hour or hour < w.end_hour
    return w.start_hour <= hour < w.end_hour


def _points(t):
    return t.points if hasattr(t, "points") else t


def filter_night(t, w: HourWindow) -> list:
    return [p for p in _points(t) if in_window(p.hour, w)]


def filter_weekend(t, w: HourWindow, days: Iterable[int] = (5, 6)) -> list:
    days = frozenset(days)
    return [p for p in _points(t) if p.weekday in days and in_window(p.hour, w)]


def night_window(params) -> HourWindow:
    return HourWindow(params.night_start_hour, params.night_end_hour)


def weekend_window(params) -> HourWindow:
    return HourWindow(params.weekend_start_hour, params.weekend_end_hour)
