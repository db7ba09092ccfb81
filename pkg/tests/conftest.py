import sys
from datetime import datetime, timedelta

import pytest

from ghosthome.geo import LocalProjection
from ghosthome.model import GpsPoint, UserTrajectory

ORIGIN = (42.3601, -71.0589)

# 2025-06-16 is a Monday
MONDAY = datetime(2025, 6, 16)


def at(day: int, hour: int, minute: int = 0, second: int = 0) -> datetime:
    return MONDAY + timedelta(days=day, hours=hour, minutes=minute, seconds=second)


def traj_from_xy(rows, user="u1", origin=ORIGIN) -> UserTrajectory:
    """Trajectory from ``(timestamp, x_m, y_m)`` rows laid out around ``origin``."""
    frame = LocalProjection(*origin)
    pts = []
    for ts, x, y in rows:
        lat, lon = frame.inverse(x, y)
        pts.append(GpsPoint(user, ts, lat, lon))
    return UserTrajectory.from_points(user, pts)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        ok, detail = module.RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
