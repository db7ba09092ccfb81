from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from ghosthome.model import (
    CoordinateOutOfRange,
    DetectionParams,
    GpsPoint,
    HomeEstimate,
    InvalidParams,
    MissingField,
    UnparseableTimestamp,
    UserTrajectory,
    parse_timestamp,
    validate_point,
)


def test_validate_point_accepts_in_range_record():
    p = validate_point({"user_id": "u1", "timestamp": "2025-06-19T23:00:00Z",
                        "latitude": "29.65", "longitude": "-82.32"})
    assert p == GpsPoint("u1", datetime(2025, 6, 19, 23, tzinfo=timezone.utc), 29.65, -82.32)
    assert p.hour == 23
    assert p.weekday == 3


def test_validate_point_rejects_latitude_out_of_range():
    with pytest.raises(CoordinateOutOfRange) as info:
        validate_point({"user_id": "u1", "timestamp": "2025-06-19T23:00:00Z",
                        "latitude": "91.0", "longitude": "0.0"})
    assert info.value.field_name == "lat"


def test_validate_point_rejects_bad_timestamp():
    with pytest.raises(UnparseableTimestamp):
        validate_point({"user_id": "u1", "timestamp": "not-a-date",
                        "latitude": "0.0", "longitude": "0.0"})


@pytest.mark.parametrize("missing", ["user_id", "timestamp", "latitude", "longitude"])
def test_validate_point_names_missing_field(missing):
    raw = {"user_id": "u1", "timestamp": "2025-06-19 23:00:00", "latitude": "1", "longitude": "2"}
    raw[missing] = ""
    with pytest.raises(MissingField) as info:
        validate_point(raw)
    assert info.value.field_name == missing


def test_naive_timestamps_keep_wall_clock():
    ts = parse_timestamp("2025-06-21 23:30:00")
    assert ts.tzinfo is None and ts.hour == 23 and ts.weekday() == 5


def test_offset_timestamps_keep_their_local_hour():
    ts = parse_timestamp("2025-06-21T23:30:00-04:00")
    assert ts.hour == 23
    assert ts.utcoffset() == timedelta(hours=-4)


@pytest.mark.parametrize("text", ["2025-13-01 00:00:00", "2025-06-21", "21/06/2025 10:00:00",
                                  "2025-06-21T10:00"])
def test_other_timestamp_forms_rejected(text):
    with pytest.raises(UnparseableTimestamp):
        parse_timestamp(text)


timestamps = st.datetimes(min_value=datetime(1990, 1, 1), max_value=datetime(2060, 1, 1),
                          timezones=st.sampled_from([None, timezone.utc,
                                                     timezone(timedelta(hours=5, minutes=30)),
                                                     timezone(-timedelta(hours=4))]))


@given(
    user=st.text(alphabet="abcxyz0123_-", min_size=1, max_size=8),
    ts=timestamps,
    lat=st.floats(-90, 90),
    lon=st.floats(-180, 180),
)
def test_record_round_trip(user, ts, lat, lon):
    p = GpsPoint(user, ts, lat, lon)
    again = validate_point(p.to_record())
    assert again == p
    assert again.timestamp.utcoffset() == p.timestamp.utcoffset()


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 1000)), max_size=30))
def test_sort_is_stable_and_idempotent(rows):
    base = datetime(2025, 1, 1)
    pts = [GpsPoint("u", base + timedelta(seconds=s), 0.0, float(i % 180)) for i, (s, _) in enumerate(rows)]
    t = UserTrajectory.from_points("u", pts)
    assert UserTrajectory.from_points("u", t.points) == t
    # equal timestamps keep input order
    expected = sorted(pts, key=lambda p: p.timestamp)
    assert list(t.points) == expected


def test_trajectory_rejects_foreign_points():
    p = GpsPoint("a", datetime(2025, 1, 1), 0, 0)
    with pytest.raises(ValueError):
        UserTrajectory("b", (p,))


def test_home_estimate_invariants():
    with pytest.raises(ValueError):
        HomeEstimate("u", "ghost", "night")  # no coordinates
    with pytest.raises(ValueError):
        HomeEstimate("u", "ghost", "none", 1.0, 2.0)
    with pytest.raises(ValueError):
        HomeEstimate("u", "dbscan", "night", 1.0, 2.0, refinement_method="mean_cell_points")
    assert not HomeEstimate("u", "a1").detected


def test_default_params():
    p = DetectionParams()
    assert (p.grid_size, p.night_start_hour, p.night_end_hour) == (50.0, 22, 6)
    assert (p.weekend_start_hour, p.weekend_end_hour, p.weekend_days) == (8, 20, {5, 6})


@pytest.mark.parametrize("kwargs", [
    {"grid_size": 0.0},
    {"grid_size": -5.0},
    {"night_start_hour": 24},
    {"weekend_days": {7}},
])
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParams):
        DetectionParams(**kwargs)


def test_invalid_sub_params():
    from ghosthome.model import DbscanParams, KmeansParams

    with pytest.raises(InvalidParams):
        DetectionParams(dbscan=DbscanParams(min_pts=0))
    with pytest.raises(InvalidParams):
        DetectionParams(kmeans=KmeansParams(k=0))
