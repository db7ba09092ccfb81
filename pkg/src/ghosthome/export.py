"""GeoJSON and standalone HTML map output for detection results."""

from __future__ import annotations

import html
import json
from string import Template
from typing import Iterable, Optional, Sequence

from .model import HomeEstimate, UserTrajectory


def home_feature(e: HomeEstimate) -> dict:
    c = e.winning_cell
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [round(e.home_lon, 7), round(e.home_lat, 7)]},
        "properties": {
            "user_id": e.user_id,
            "kind": "home",
            "inference_source": e.inference_source,
            "refinement_method": e.refinement_method,
            "stay_time_s": None if c is None else c.stay_time,
            "unique_nights": None if c is None else c.unique_nights,
            "total_points": None if c is None else c.total_points,
            "algorithm": e.algorithm,
        },
    }


def trace_feature(t: UserTrajectory) -> Optional[dict]:
    coords = [[round(p.lon, 7), round(p.lat, 7)] for p in t.points]
    if len({tuple(c) for c in coords}) < 2:
        return None
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {"user_id": t.user_id, "kind": "trace", "n_points": len(coords)},
    }


def to_geojson(estimates: Iterable[HomeEstimate],
               trajectories: Optional[Sequence[UserTrajectory]] = None) -> dict:
    """FeatureCollection of detected homes (undetected users are skipped),
    optionally preceded by one trace LineString per user."""
    features = []
    for t in sorted(trajectories or (), key=lambda t: t.user_id):
        f = trace_feature(t)
        if f is not None:
            features.append(f)
    for e in sorted(estimates, key=lambda e: e.user_id):
        if e.detected:
            features.append(home_feature(e))
    return {"type": "FeatureCollection", "features": features}


_PAGE = Template("""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>$title</title>
<link rel="stylesheet" href="https://unpkg.com/leaflet@1.9.4/dist/leaflet.css">
<script src="https://unpkg.com/leaflet@1.9.4/dist/leaflet.js"></script>
<style>
  html, body, #map { height: 100%; margin: 0; }
  .legend { background: white; padding: 6px 10px; font: 13px sans-serif; max-width: 280px; }
</style>
</head>
<body>
<div id="map"></div>
<script>
const data = $geojson;
const map = L.map("map");
L.tileLayer("https://{s}.tile.openstreetmap.org/{z}/{x}/{y}.png", {
  maxZoom: 19, attribution: "&copy; OpenStreetMap contributors"
}).addTo(map);
const layer = L.geoJSON(data, {
  style: f => ({color: "#3366cc", weight: 2, opacity: 0.6}),
  pointToLayer: (f, ll) => L.circleMarker(ll, {
    radius: 7, color: f.properties.inference_source === "weekend" ? "#e6731a" : "#c0392b"
  }),
  onEachFeature: (f, l) => l.bindPopup(Object.entries(f.properties)
      .map(([k, v]) => k + ": " + v).join("<br>"))
}).addTo(map);
if (layer.getBounds().isValid()) { map.fitBounds(layer.getBounds().pad(0.1)); }
else { map.setView([0, 0], 2); }
const legend = L.control({position: "bottomright"});
legend.onAdd = () => {
  const div = L.DomUtil.create("div", "legend");
  div.innerHTML = $legend;
  return div;
};
legend.addTo(map);
</script>
</body>
</html>
""")


def render_html(geojson: dict, omitted: Sequence[str], title: str = "Inferred home locations") -> str:
    n_homes = sum(f["properties"].get("kind") == "home" for f in geojson["features"])
    legend = (f"<b>{html.escape(title)}</b><br>"
              "<span style='color:#c0392b'>&#9679;</span> night-inferred home<br>"
              "<span style='color:#e6731a'>&#9679;</span> weekend-inferred home<br>"
              f"{n_homes} home(s) shown")
    if omitted:
        legend += "<br>No home detected: " + html.escape(", ".join(omitted))
    # keep "</script>" sequences out of the inline script
    payload = json.dumps(geojson, sort_keys=True).replace("</", "<\\/")
    return _PAGE.substitute(title=html.escape(title), geojson=payload,
                            legend=json.dumps(legend).replace("</", "<\\/"))


def export_map(estimates: Sequence[HomeEstimate], geojson_path, html_path,
               trajectories: Optional[Sequence[UserTrajectory]] = None) -> dict:
    gj = to_geojson(estimates, trajectories)
    with open(geojson_path, "w", encoding="utf-8") as fh:
        json.dump(gj, fh, indent=1, sort_keys=True)
        fh.write("\n")
    omitted = sorted(e.user_id for e in estimates if not e.detected)
    with open(html_path, "w", encoding="utf-8") as fh:
        fh.write(render_html(gj, omitted))
    return gj
