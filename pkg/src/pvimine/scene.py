"""Site layout and spatial-relationship queries.

A scene bundles the pedestrian zones, the crossing region of interest and
the lane polygons for one observation site, loaded from a YAML document.
All geometry predicates operate on shapely polygons; trajectory corridors
are unions of per-sample footprints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml
from shapely.geometry import MultiPolygon, Point, Polygon
from shapely.ops import unary_union

from .errors import ConfigError, GeometryError
from .trajectory import Trajectory


@dataclass(frozen=True)
class Lane:
    lane_id: str
    polygon: Polygon
    direction: str


@dataclass(frozen=True)
class SceneConfig:
    """Immutable site layout: zones, ROI, lanes and the near-side mapping."""

    zones: dict[str, Polygon]
    roi: Polygon
    lanes: dict[str, Lane]
    near_side_map: dict[str, str]


def _polygon_from_vertices(verts, name: str) -> Polygon:
    arr = np.asarray(verts, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] != 2:
        raise ConfigError(f"{name}: need >= 3 [x, y] vertices")
    poly = Polygon(arr)
    if not poly.is_valid or poly.area <= 0:
        raise ConfigError(f"{name}: polygon is degenerate or self-intersecting")
    return poly


def load_scene(source) -> SceneConfig:
    """Load a scene description from a YAML path, stream, or string."""
    if hasattr(source, "read"):
        doc = yaml.safe_load(source)
    elif isinstance(source, str) and "\n" not in source and source.endswith((".yaml", ".yml")):
        with open(source) as fh:
            doc = yaml.safe_load(fh)
    else:
        doc = yaml.safe_load(source)
    if not isinstance(doc, dict):
        raise ConfigError("scene file must be a mapping")
    unknown = set(doc) - {"zones", "roi", "lanes", "near_side_map"}
    if unknown:
        raise ConfigError(f"scene file has unknown keys: {sorted(unknown)}")
    for key in ("zones", "roi", "lanes", "near_side_map"):
        if key not in doc:
            raise ConfigError(f"scene file missing key '{key}'")

    zones = {}
    for entry in doc["zones"]:
        zid = str(entry["id"])
        if zid in zones:
            raise ConfigError(f"duplicate zone id '{zid}'")
        zones[zid] = _polygon_from_vertices(entry["polygon"], f"zone '{zid}'")
    roi = _polygon_from_vertices(doc["roi"], "roi")
    lanes = {}
    for entry in doc["lanes"]:
        lid = str(entry["id"])
        if lid in lanes:
            raise ConfigError(f"duplicate lane id '{lid}'")
        lanes[lid] = Lane(lid, _polygon_from_vertices(entry["polygon"], f"lane '{lid}'"),
                          str(entry.get("direction", "")))
    near_side_map = {str(k): str(v) for k, v in doc["near_side_map"].items()}
    for zid, lid in near_side_map.items():
        if zid not in zones:
            raise ConfigError(f"near_side_map key '{zid}' is not a zone id")
        if lid not in lanes:
            raise ConfigError(f"near_side_map value '{lid}' is not a lane id")
    return SceneConfig(zones=zones, roi=roi, lanes=lanes, near_side_map=near_side_map)


def polygon_intersection(a: Polygon, b: Polygon) -> list[Polygon]:
    """Intersection of two simple polygons as a (possibly empty) polygon list."""
    for name, poly in (("a", a), ("b", b)):
        if poly.area <= 0:
            raise GeometryError(f"polygon {name} is degenerate (area 0)")
    result = a.intersection(b)
    if result.is_empty:
        return []
    if isinstance(result, Polygon):
        return [result] if result.area > 0 else []
    if isinstance(result, MultiPolygon):
        return [g for g in result.geoms if g.area > 0]
    # lines / points from tangent contact carry no area
    polys = [g for g in getattr(result, "geoms", []) if isinstance(g, Polygon) and g.area > 0]
    return polys


@dataclass(frozen=True)
class SweptCorridor:
    """Union of a track's footprints over a time window."""

    track_id: str
    t0: float
    t1: float
    footprints: tuple
    union: Polygon | MultiPolygon

    @property
    def area(self) -> float:
        return self.union.area


def swept_corridor(track: Trajectory, window: tuple[float, float] | None = None) -> SweptCorridor:
    """Union the footprints whose sample times fall inside ``window``."""
    t0, t1 = window if window is not None else (track.t_s, track.t_e)
    if t1 < t0:
        raise GeometryError(f"empty window [{t0}, {t1}]")
    if t0 < track.t_s - 1e-9 or t1 > track.t_e + 1e-9:
        raise GeometryError(
            f"window [{t0}, {t1}] outside track span [{track.t_s}, {track.t_e}]")
    mask = (track.t >= t0 - 1e-9) & (track.t <= t1 + 1e-9)
    members = [fp for fp, m in zip(track.footprints, mask) if m]
    if not members:
        raise GeometryError(f"window [{t0}, {t1}] contains no samples")
    return SweptCorridor(track.track_id, t0, t1, tuple(members), unary_union(members))


def _zone_at(point: Point, scene: SceneConfig) -> str | None:
    for zid, poly in scene.zones.items():
        if poly.covers(point):
            return zid
    return None


def classify_zone_transition(ped: Trajectory, scene: SceneConfig) -> tuple[str, str] | None:
    """Approach/target zones for a pedestrian crossing through the ROI.

    Zone membership is tested with the smoothed footprint center.  Returns
    None when the pedestrian never traverses the ROI between two distinct
    zones (including aborted crossings back into the approach zone).
    """
    if ped.cls != "pedestrian":
        raise ValueError(f"track '{ped.track_id}' is not a pedestrian")
    pts = [Point(xy) for xy in ped.xy_smooth]
    in_roi = np.array([scene.roi.covers(p) for p in pts])
    if not in_roi.any():
        return None
    first_in = int(np.argmax(in_roi))
    last_in = len(in_roi) - 1 - int(np.argmax(in_roi[::-1]))

    approach = None
    for i in range(first_in - 1, -1, -1):
        approach = _zone_at(pts[i], scene)
        if approach is not None:
            break
    target = None
    for i in range(last_in + 1, len(pts)):
        target = _zone_at(pts[i], scene)
        if target is not None:
            break
    if approach is None or target is None or approach == target:
        return None
    return approach, target


def classify_conflict_situation(veh: Trajectory, approach_zone_id: str,
                                scene: SceneConfig) -> str:
    """'near_side' or 'far_side' by majority lane occupancy inside the ROI."""
    if approach_zone_id not in scene.near_side_map:
        raise ConfigError(f"no near-side lane mapped for zone '{approach_zone_id}'")
    counts: dict[str, int] = {lid: 0 for lid in scene.lanes}
    for xy in veh.xy_smooth:
        point = Point(xy)
        if not scene.roi.covers(point):
            continue
        for lid, lane in scene.lanes.items():
            if lane.polygon.covers(point):
                counts[lid] += 1
                break
    total = sum(counts.values())
    if total == 0:
        raise GeometryError(
            f"vehicle '{veh.track_id}' intersects no configured lane inside the ROI")
    best = max(counts, key=lambda lid: counts[lid])
    return "near_side" if best == scene.near_side_map[approach_zone_id] else "far_side"
