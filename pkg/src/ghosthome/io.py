"""Loading GPX and CSV trajectories, and writing result tables."""

from __future__ import annotations

import csv
import logging
import os
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .model import (
    REQUIRED_FIELDS,
    HomeEstimate,
    CellStats,
    RecordRejected,
    UserTrajectory,
    format_timestamp,
    group_by_user,
    validate_point,
)

log = logging.getLogger(__name__)


class IngestError(Exception):
    pass


class MissingHeader(IngestError):
    pass


class NoValidRecords(IngestError):
    pass


class MalformedXml(IngestError):
    pass


class MalformedResults(IngestError):
    pass


@dataclass
class IngestSummary:
    files_read: int = 0
    records_accepted: int = 0
    records_rejected: int = 0
    users: int = 0
    rejection_breakdown: Counter = field(default_factory=Counter)

    def reject(self, exc: RecordRejected) -> None:
        self.records_rejected += 1
        self.rejection_breakdown[exc.kind] += 1

    def merge(self, other: "IngestSummary") -> None:
        self.files_read += other.files_read
        self.records_accepted += other.records_accepted
        self.records_rejected += other.records_rejected
        self.rejection_breakdown.update(other.rejection_breakdown)


def _require_file(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(str(path))
    return path


def _read_csv_points(path, column_map: Optional[Mapping[str, str]], summary: IngestSummary) -> list:
    names = {f: f for f in REQUIRED_FIELDS}
    names.update(column_map or {})
    points = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if not header:
            raise MissingHeader(f"{path}: no header row")
        absent = [names[f] for f in REQUIRED_FIELDS if names[f] not in header]
        if absent:
            raise MissingHeader(f"{path}: missing columns {absent}")
        for row in reader:
            raw = {f: row.get(names[f]) for f in REQUIRED_FIELDS}
            try:
                points.append(validate_point(raw))
            except RecordRejected as exc:
                summary.reject(exc)
    summary.files_read += 1
    summary.records_accepted += len(points)
    return points


def parse_csv(path, column_map: Optional[Mapping[str, str]] = None):
    """One trajectory per distinct user_id in a CSV file.

    ``column_map`` maps the canonical names (user_id, timestamp, latitude,
    longitude) to the file's column names.
    """
    path = _require_file(path)
    summary = IngestSummary()
    points = _read_csv_points(path, column_map, summary)
    if not points:
        raise NoValidRecords(f"{path}: no valid records")
    trajectories = group_by_user(points)
    summary.users = len(trajectories)
    return trajectories, summary


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _read_gpx_points(path: Path, user_id: str, summary: IngestSummary) -> list:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise MalformedXml(f"{path}: {exc}") from None
    points = []
    for el in root.iter():
        if _local(el.tag) != "trkpt":
            continue
        time_text = None
        for child in el:
            if _local(child.tag) == "time":
                time_text = (child.text or "").strip()
        raw = {"user_id": user_id, "timestamp": time_text,
               "latitude": el.get("lat"), "longitude": el.get("lon")}
        try:
            points.append(validate_point(raw))
        except RecordRejected as exc:
            summary.reject(exc)
    summary.files_read += 1
    summary.records_accepted += len(points)
    return points


def parse_gpx(path, user_id: Optional[str] = None):
    """Track points of a GPX file as one trajectory (user id defaults to the file stem)."""
    path = _require_file(path)
    summary = IngestSummary()
    uid = user_id or path.stem
    points = _read_gpx_points(path, uid, summary)
    if not points:
        raise NoValidRecords(f"{path}: no valid track points")
    summary.users = 1
    return UserTrajectory.from_points(uid, points), summary


def load_directory(path, column_map: Optional[Mapping[str, str]] = None):
    """Every *.gpx and *.csv directly inside ``path``, merged by user_id."""
    path = Path(path)
    if not path.is_dir():
        raise NotADirectoryError(str(path))
    summary = IngestSummary()
    points = []
    for f in sorted(path.iterdir(), key=lambda f: f.name):
        suffix = f.suffix.lower()
        if not f.is_file() or suffix not in (".gpx", ".csv"):
            continue
        part = IngestSummary()
        if suffix == ".gpx":
            points.extend(_read_gpx_points(f, f.stem, part))
        else:
            points.extend(_read_csv_points(f, column_map, part))
        summary.merge(part)
    if not points:
        raise NoValidRecords(f"{path}: no valid records in any GPX/CSV file")
    trajectories = group_by_user(points)
    summary.users = len(trajectories)
    return trajectories, summary


def load_input(path, column_map=None):
    """Dispatch on a directory, a .gpx file or a .csv file."""
    p = Path(path)
    if p.is_dir():
        return load_directory(p, column_map)
    if p.suffix.lower() == ".gpx":
        t, summary = parse_gpx(p)
        return [t], summary
    return parse_csv(p, column_map)


def write_trajectories_csv(path, trajectories: Sequence[UserTrajectory]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REQUIRED_FIELDS)
        for t in trajectories:
            for p in t.points:
                w.writerow([p.user_id, format_timestamp(p.timestamp), repr(p.lat), repr(p.lon)])


def write_gpx(path, trajectory: UserTrajectory) -> None:
    gpx = ET.Element("gpx", version="1.1", creator="ghosthome",
                     xmlns="http://www.topografix.com/GPX/1/1")
    seg = ET.SubElement(ET.SubElement(gpx, "trk"), "trkseg")
    for p in trajectory.points:
        pt = ET.SubElement(seg, "trkpt", lat=repr(p.lat), lon=repr(p.lon))
        ET.SubElement(pt, "time").text = format_timestamp(p.timestamp)
    ET.ElementTree(gpx).write(path, encoding="utf-8", xml_declaration=True)


RESULT_COLUMNS = ("user_id", "home_lat", "home_lon", "inference_source", "refinement_method",
                  "stay_time_s", "unique_nights", "total_points", "algorithm")


def _fmt(value, spec):
    return "" if value is None else format(value, spec)


def write_results(path, estimates: Iterable[HomeEstimate]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for e in sorted(estimates, key=lambda e: e.user_id):
            c = e.winning_cell
            w.writerow([
                e.user_id,
                _fmt(e.home_lat, ".7f"),
                _fmt(e.home_lon, ".7f"),
                e.inference_source,
                e.refinement_method,
                _fmt(c and c.stay_time, ".3f"),
                _fmt(c and c.unique_nights, "d"),
                _fmt(c and c.total_points, "d"),
                e.algorithm,
            ])


def read_results(path) -> List[HomeEstimate]:
    path = _require_file(path)
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(RESULT_COLUMNS) - set(reader.fieldnames):
            raise MalformedResults(f"{path}: expected columns {list(RESULT_COLUMNS)}")
        for n, row in enumerate(reader, start=2):
            try:
                detected = row["inference_source"] != "none"
                cell = None
                if row["stay_time_s"]:
                    cell = CellStats(float("nan"), float("nan"), float(row["stay_time_s"]),
                                     int(row["unique_nights"]), int(row["total_points"]))
                out.append(HomeEstimate(
                    user_id=row["user_id"],
                    algorithm=row["algorithm"],
                    inference_source=row["inference_source"],
                    home_lat=float(row["home_lat"]) if detected else None,
                    home_lon=float(row["home_lon"]) if detected else None,
                    refinement_method=row["refinement_method"],
                    winning_cell=cell,
                ))
            except (ValueError, TypeError) as exc:
                raise MalformedResults(f"{path}:{n}: {exc}") from None
    return out
