import json
import math

from ghosthome.export import export_map, to_geojson
from ghosthome.model import CellStats, GpsPoint, HomeEstimate, UserTrajectory

from conftest import at

GEOMETRY_TYPES = {"Point", "LineString"}


def _position_ok(pos):
    return (isinstance(pos, list) and len(pos) in (2, 3)
            and all(isinstance(v, (int, float)) and math.isfinite(v) for v in pos)
            and -180 <= pos[0] <= 180 and -90 <= pos[1] <= 90)


def geojson_errors(doc):
    """Structural checks for a FeatureCollection of Point/LineString features."""
    errors = []
    if doc.get("type") != "FeatureCollection" or not isinstance(doc.get("features"), list):
        return ["not a FeatureCollection"]
    for i, f in enumerate(doc["features"]):
        if f.get("type") != "Feature":
            errors.append(f"{i}: type")
        if not isinstance(f.get("properties"), (dict, type(None))):
            errors.append(f"{i}: properties")
        g = f.get("geometry")
        if not isinstance(g, dict) or g.get("type") not in GEOMETRY_TYPES:
            errors.append(f"{i}: geometry")
            continue
        c = g.get("coordinates")
        if g["type"] == "Point" and not _position_ok(c):
            errors.append(f"{i}: point coordinates")
        if g["type"] == "LineString" and not (isinstance(c, list) and len(c) >= 2 and all(map(_position_ok, c))):
            errors.append(f"{i}: linestring coordinates")
    return errors


def _estimates():
    return [
        HomeEstimate("a", "ghost", "night", 42.1, -71.1, "densest_bin_centroid", CellStats(0, 0, 3600.0, 2, 9)),
        HomeEstimate("b", "ghost", "weekend", 42.2, -71.2, "mean_cell_points", CellStats(0, 0, 60.0, 1, 2)),
        HomeEstimate("c", "ghost", "none"),
    ]


def test_two_points_one_omitted():
    gj = to_geojson(_estimates())
    assert [f["properties"]["user_id"] for f in gj["features"]] == ["a", "b"]
    assert gj["features"][0]["geometry"] == {"type": "Point", "coordinates": [-71.1, 42.1]}
    assert gj["features"][1]["properties"]["inference_source"] == "weekend"
    assert geojson_errors(gj) == []


def test_traces_and_files(tmp_path):
    t = UserTrajectory.from_points("a", [GpsPoint("a", at(0, 23, i), 42.1 + i / 1000, -71.1) for i in range(3)])
    still = UserTrajectory.from_points("b", [GpsPoint("b", at(0, 23), 42.2, -71.2)])
    gj = export_map(_estimates(), tmp_path / "h.geojson", tmp_path / "m.html", [t, still])
    kinds = [f["properties"]["kind"] for f in gj["features"]]
    assert kinds == ["trace", "home", "home"]
    assert geojson_errors(json.loads((tmp_path / "h.geojson").read_text())) == []
    page = (tmp_path / "m.html").read_text()
    assert page.startswith("<!DOCTYPE html>")
    assert "No home detected: c" in page
    assert '"user_id": "a"' in page


def test_html_escapes_script_close(tmp_path):
    e = HomeEstimate("</script>x", "ghost", "night", 1.0, 1.0, "mean_cell_points", CellStats(0, 0, 0.0, 1, 1))
    export_map([e], tmp_path / "h.geojson", tmp_path / "m.html")
    page = (tmp_path / "m.html").read_text()
    assert page.count("</script>") == 2  # the library include and the inline block
