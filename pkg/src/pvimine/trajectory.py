"""Trajectory ingest: parsing, validation, resampling, smoothing, footprints.

The on-disk interchange format is a flat table with columns
``track_id,class,t,x,y,length,width,heading`` (CSV with a header row, or
JSONL with one object per sample).  Lengths are meters, ``t`` seconds,
``heading`` radians CCW from +x.  ``length``/``width``/``heading`` may be
empty for pedestrians only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon

from .errors import GeometryError, SchemaError

ROAD_USER_CLASSES = ("pedestrian", "car", "bicycle")
VEHICLE_CLASSES = ("car", "bicycle")

CSV_COLUMNS = ("track_id", "class", "t", "x", "y", "length", "width", "heading")

#: default resample period, seconds (25 Hz camera cadence)
DEFAULT_PERIOD = 0.04
#: default moving-average window, seconds
DEFAULT_SMOOTH_WINDOW = 0.52
#: default pedestrian footprint circumradius, meters
DEFAULT_PED_RADIUS = 0.3


@dataclass
class RawTrack:
    """One road user's raw, validated samples (non-uniform timestamps allowed)."""

    track_id: str
    cls: str
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    length: np.ndarray  # NaN where absent
    width: np.ndarray
    heading: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


@dataclass
class Trajectory:
    """Uniformly resampled track with derived kinematics and footprints.

    ``xy`` holds the grid-interpolated positions, ``xy_smooth`` the
    moving-average positions that speed, acceleration and footprints are
    derived from.  Instances are treated as immutable after construction.
    """

    track_id: str
    cls: str
    period: float
    t: np.ndarray
    xy: np.ndarray
    xy_smooth: np.ndarray
    speed: np.ndarray
    accel: np.ndarray
    footprints: list = field(repr=False)

    @property
    def t_s(self) -> float:
        return float(self.t[0])

    @property
    def t_e(self) -> float:
        return float(self.t[-1])

    def index_at(self, time: float) -> int:
        """Nearest sample index for a time inside [t_s, t_e]."""
        return int(round((time - self.t_s) / self.period))


def _parse_float(value, column: str, where: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise SchemaError(f"{where}: column '{column}' is not a number: {value!r}")
    if not math.isfinite(out):
        raise SchemaError(f"{where}: column '{column}' is not finite: {value!r}")
    return out


def _parse_optional(value, column: str, where: str) -> float:
    if value is None or value == "":
        return math.nan
    return _parse_float(value, column, where)


def _rows_from_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty input: missing CSV header")
    if tuple(h.strip() for h in header) != CSV_COLUMNS:
        raise SchemaError(
            f"line 1: bad CSV header {header!r}, expected {','.join(CSV_COLUMNS)}"
        )
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise SchemaError(f"line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        yield lineno, dict(zip(CSV_COLUMNS, row))


def _rows_from_jsonl(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {lineno}: invalid JSON: {exc}")
        if not isinstance(obj, dict):
            raise SchemaError(f"line {lineno}: expected a JSON object")
        unknown = set(obj) - set(CSV_COLUMNS)
        if unknown:
            raise SchemaError(f"line {lineno}: unknown keys {sorted(unknown)}")
        for key in ("track_id", "class", "t", "x", "y"):
            if key not in obj:
                raise SchemaError(f"line {lineno}: missing required key '{key}'")
        yield lineno, obj


def parse_trajectories(source, format: str = "csv") -> list[RawTrack]:
    """Parse the interchange format into one :class:`RawTrack` per track_id.

    ``source`` may be a byte/text stream or a string.  Malformed rows abort
    the parse (skipping rows would silently bias downstream statistics).
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"input is not valid UTF-8: {exc}")

    if format == "csv":
        rows = _rows_from_csv(text)
    elif format == "jsonl":
        rows = _rows_from_jsonl(text)
    else:
        raise ValueError(f"unknown format {format!r}")

    acc: dict[str, dict[str, list]] = {}
    order: list[str] = []
    for lineno, row in rows:
        where = f"line {lineno}"
        tid = str(row["track_id"])
        if not tid:
            raise SchemaError(f"{where}: empty track_id")
        cls = str(row["class"])
        if cls not in ROAD_USER_CLASSES:
            raise SchemaError(f"{where}: unknown class {cls!r} for track '{tid}'")
        t = _parse_float(row["t"], "t", where)
        x = _parse_float(row["x"], "x", where)
        y = _parse_float(row["y"], "y", where)
        length = _parse_optional(row.get("length"), "length", where)
        width = _parse_optional(row.get("width"), "width", where)
        heading = _parse_optional(row.get("heading"), "heading", where)
        for name, val in (("length", length), ("width", width)):
            if not math.isnan(val) and val <= 0:
                raise SchemaError(f"{where}: {name} must be > 0, got {val}")

        if tid not in acc:
            acc[tid] = {"cls": cls, "t": [], "x": [], "y": [],
                        "length": [], "width": [], "heading": []}
            order.append(tid)
        track = acc[tid]
        if track["cls"] != cls:
            raise SchemaError(f"{where}: track '{tid}' changes class "
                              f"{track['cls']!r} -> {cls!r}")
        if track["t"]:
            if t == track["t"][-1]:
                raise SchemaError(f"{where}: duplicate timestamp {t} in track '{tid}'")
            if t < track["t"][-1]:
                raise SchemaError(f"{where}: non-monotonic timestamp in track '{tid}' "
                                  f"({track['t'][-1]} then {t})")
        track["t"].append(t)
        track["x"].append(x)
        track["y"].append(y)
        track["length"].append(length)
        track["width"].append(width)
        track["heading"].append(heading)

    return [
        RawTrack(
            track_id=tid,
            cls=acc[tid]["cls"],
            t=np.asarray(acc[tid]["t"], dtype=float),
            x=np.asarray(acc[tid]["x"], dtype=float),
            y=np.asarray(acc[tid]["y"], dtype=float),
            length=np.asarray(acc[tid]["length"], dtype=float),
            width=np.asarray(acc[tid]["width"], dtype=float),
            heading=np.asarray(acc[tid]["heading"], dtype=float),
        )
        for tid in order
    ]


def _format_value(value: float) -> str:
    if math.isnan(value):
        return ""
    return repr(float(value))


def serialize_trajectories(tracks: list[RawTrack], format: str = "csv") -> str:
    """Inverse of :func:`parse_trajectories` (parse∘serialize is the identity)."""
    lines = []
    if format == "csv":
        lines.append(",".join(CSV_COLUMNS))
        for track in tracks:
            for i in range(len(track)):
                lines.append(",".join([
                    track.track_id, track.cls,
                    repr(float(track.t[i])), repr(float(track.x[i])),
                    repr(float(track.y[i])),
                    _format_value(track.length[i]),
                    _format_value(track.width[i]),
                    _format_value(track.heading[i]),
                ]))
    elif format == "jsonl":
        for track in tracks:
            for i in range(len(track)):
                obj = {
                    "track_id": track.track_id,
                    "class": track.cls,
                    "t": float(track.t[i]),
                    "x": float(track.x[i]),
                    "y": float(track.y[i]),
                }
                for name in ("length", "width", "heading"):
                    val = getattr(track, name)[i]
                    if not math.isnan(val):
                        obj[name] = float(val)
                lines.append(json.dumps(obj))
    else:
        raise ValueError(f"unknown format {format!r}")
    return "\n".join(lines) + "\n"


def build_footprint(cls: str, x: float, y: float, heading: float = math.nan,
                    length: float = math.nan, width: float = math.nan,
                    ped_radius: float = DEFAULT_PED_RADIUS) -> Polygon:
    """Footprint polygon: oriented rectangle for vehicles, octagon for pedestrians.

    The pedestrian octagon is inscribed in a circle of ``ped_radius`` with a
    vertex on the +x axis, giving axis-aligned extents of exactly
    ``±ped_radius``.
    """
    if cls == "pedestrian":
        if ped_radius <= 0:
            raise GeometryError(f"ped_radius must be > 0, got {ped_radius}")
        angles = np.arange(8) * (math.pi / 4.0)
        verts = np.column_stack([x + ped_radius * np.cos(angles),
                                 y + ped_radius * np.sin(angles)])
        return Polygon(verts)
    for name, val in (("heading", heading), ("length", length), ("width", width)):
        if math.isnan(val):
            raise GeometryError(f"vehicle footprint requires {name}")
    if length <= 0 or width <= 0:
        raise GeometryError(f"footprint dimensions must be > 0 ({length} x {width})")
    hl, hw = length / 2.0, width / 2.0
    c, s = math.cos(heading), math.sin(heading)
    corners = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = corners @ np.array([[c, s], [-s, c]])
    return Polygon(rot + np.array([x, y]))


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Symmetric moving average with shrinking windows at the boundaries.

    The window shrinks symmetrically near the edges, so linear signals pass
    through unchanged everywhere (required for the constant-velocity
    identity to hold at the ends).
    """
    n = len(values)
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(values, axis=0)])
    idx = np.arange(n)
    h = np.minimum(half, np.minimum(idx, n - 1 - idx))
    lo, hi = idx - h, idx + h
    out = (csum[hi + 1] - csum[lo]) / (hi - lo + 1)
    return out


def _interp_heading(t_grid: np.ndarray, t: np.ndarray, heading: np.ndarray) -> np.ndarray:
    if np.isnan(heading).all():
        return np.full(len(t_grid), np.nan)
    if np.isnan(heading).any():
        raise SchemaError("heading must be present for all samples or none")
    return np.interp(t_grid, t, np.unwrap(heading))


def resample_and_smooth(track: RawTrack, period: float = DEFAULT_PERIOD,
                        smooth_window: float = DEFAULT_SMOOTH_WINDOW,
                        ped_radius: float = DEFAULT_PED_RADIUS) -> Trajectory:
    """Resample a raw track onto a uniform grid and derive kinematics.

    Positions are linearly interpolated onto ``t_s, t_s+period, ...``, then
    smoothed by a symmetric moving average of ``round(smooth_window/period)``
    samples (forced odd).  Speed is the centered finite difference of the
    smoothed positions; acceleration the centered difference of speed.
    Footprints are built from the smoothed positions.
    """
    if period <= 0:
        raise ValueError(f"period must be > 0, got {period}")
    if smooth_window < period:
        raise ValueError(f"smooth_window ({smooth_window}) must be >= period ({period})")
    if len(track) < 2:
        raise SchemaError(f"track '{track.track_id}' has {len(track)} samples, need >= 2")
    duration = track.t[-1] - track.t[0]
    if duration < smooth_window:
        raise SchemaError(
            f"track '{track.track_id}' spans {duration:.3f}s, "
            f"shorter than smooth_window {smooth_window}s")

    n = int(math.floor(duration / period + 1e-9)) + 1
    t_grid = track.t[0] + period * np.arange(n)
    x = np.interp(t_grid, track.t, track.x)
    y = np.interp(t_grid, track.t, track.y)
    xy = np.column_stack([x, y])

    window = int(round(smooth_window / period))
    if window % 2 == 0:
        window += 1
    xs = _moving_average(x, window)
    ys = _moving_average(y, window)
    xy_smooth = np.column_stack([xs, ys])

    speed = np.empty(n)
    diffs = xy_smooth[2:] - xy_smooth[:-2]
    speed[1:-1] = np.hypot(diffs[:, 0], diffs[:, 1]) / (2.0 * period)
    speed[0] = np.hypot(*(xy_smooth[1] - xy_smooth[0])) / period
    speed[-1] = np.hypot(*(xy_smooth[-1] - xy_smooth[-2])) / period

    accel = np.empty(n)
    accel[1:-1] = (speed[2:] - speed[:-2]) / (2.0 * period)
    accel[0] = (speed[1] - speed[0]) / period
    accel[-1] = (speed[-1] - speed[-2]) / period

    heading = _interp_heading(t_grid, track.t, track.heading)
    length = np.interp(t_grid, track.t, track.length)
    width = np.interp(t_grid, track.t, track.width)

    footprints = [
        build_footprint(track.cls, xs[i], ys[i], heading[i], length[i], width[i],
                        ped_radius=ped_radius)
        for i in range(n)
    ]
    return Trajectory(
        track_id=track.track_id, cls=track.cls, period=period,
        t=t_grid, xy=xy, xy_smooth=xy_smooth, speed=speed, accel=accel,
        footprints=footprints,
    )
