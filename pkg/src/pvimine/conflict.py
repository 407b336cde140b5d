"""Conflict-area construction, PET, reaction detection, extrapolation, TTA.

The conflict area (CA) is the overlap of the two actors' swept corridors
clipped to the ROI.  PET is signed: positive when the pedestrian clears the
CA first, negative when the vehicle does.  For the predictive metrics the
pedestrian state at deceleration onset is extrapolated linearly to obtain
the predicted conflict area CA', against which the vehicle's
time-to-approach is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import MultiPolygon, Polygon
from shapely.ops import unary_union

from .errors import GeometryError
from .pairing import CandidatePair
from .scene import SceneConfig, swept_corridor
from .trajectory import DEFAULT_PED_RADIUS, Trajectory, build_footprint

#: sliver-intersection cutoff for conflict areas, m^2
DEFAULT_MIN_AREA = 0.01
#: deceleration-onset threshold, m/s^2
DEFAULT_A_THRESH = -0.4
#: minimum deceleration-run length, seconds
DEFAULT_MIN_LEN = 0.2
#: pedestrian extrapolation horizon for CA', seconds
DEFAULT_HORIZON = 10.0

PEDESTRIAN_FIRST = "pedestrian_first"
VEHICLE_FIRST = "vehicle_first"

_V_EPS = 1e-6


@dataclass(frozen=True)
class ConflictArea:
    polygon: Polygon | MultiPolygon
    t_entry_ped: float
    t_exit_ped: float
    t_entry_veh: float
    t_exit_veh: float

    @property
    def area(self) -> float:
        return self.polygon.area


@dataclass(frozen=True)
class PetResult:
    pet: float
    constellation: str
    co_occupied: bool = False


@dataclass(frozen=True)
class ReactionInterval:
    """Deceleration onset/end; ``t_p`` is an optional perception annotation."""

    t_d: float
    t_f: float
    t_p: float | None = None


@dataclass(frozen=True)
class TtaSeries:
    ca_prime: Polygon | MultiPolygon
    samples: tuple  # (t, d, v, tta-or-None)
    reached: bool


def _occupancy_window(track: Trajectory, polygon) -> tuple[float, float] | None:
    hits = [i for i, fp in enumerate(track.footprints) if fp.intersects(polygon)]
    if not hits:
        return None
    return float(track.t[hits[0]]), float(track.t[hits[-1]])


def conflict_area(pair: CandidatePair, ped: Trajectory, veh: Trajectory,
                  scene: SceneConfig, min_area: float = DEFAULT_MIN_AREA,
                  ) -> ConflictArea | None:
    """Overlap of the full-track swept corridors, clipped to the ROI.

    Entry/exit times are resolved at sample resolution: the first/last
    resampled instant whose footprint touches the conflict polygon.
    """
    ped_corr = swept_corridor(ped)
    veh_corr = swept_corridor(veh)
    overlap = ped_corr.union.intersection(veh_corr.union)
    if overlap.is_empty:
        return None
    clipped = overlap.intersection(scene.roi)
    if clipped.is_empty or clipped.area < min_area:
        return None
    ped_win = _occupancy_window(ped, clipped)
    veh_win = _occupancy_window(veh, clipped)
    if ped_win is None or veh_win is None:
        return None
    return ConflictArea(clipped, ped_win[0], ped_win[1], veh_win[0], veh_win[1])


def pet(ca: ConflictArea) -> PetResult:
    """Signed post-encroachment time from the CA occupancy windows.

    Temporally co-occupied conflict areas (a collision or near-collision)
    yield pet 0 with a flag instead of an error, with the constellation
    taken from the earlier entrant.
    """
    if ca.t_entry_veh < ca.t_exit_ped and ca.t_entry_ped < ca.t_exit_veh:
        constellation = (PEDESTRIAN_FIRST if ca.t_entry_ped <= ca.t_entry_veh
                         else VEHICLE_FIRST)
        return PetResult(0.0, constellation, co_occupied=True)
    if ca.t_exit_ped <= ca.t_entry_veh:
        return PetResult(ca.t_entry_veh - ca.t_exit_ped, PEDESTRIAN_FIRST)
    return PetResult(ca.t_exit_veh - ca.t_entry_ped, VEHICLE_FIRST)


def detect_reaction(ped: Trajectory, roi_window: tuple[float, float],
                    a_thresh: float = DEFAULT_A_THRESH,
                    min_len: float = DEFAULT_MIN_LEN) -> ReactionInterval | None:
    """First sustained deceleration run inside the ROI residence window.

    Returns the start/end of the first maximal run of samples with
    acceleration below ``a_thresh`` lasting at least ``min_len``, or None.
    """
    t0, t1 = roi_window
    mask = (ped.t >= t0 - 1e-9) & (ped.t <= t1 + 1e-9)
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return None
    decel = ped.accel[idx] < a_thresh
    need = int(round(min_len / ped.period)) + 1
    run_start = None
    for k, flag in enumerate(decel):
        if flag and run_start is None:
            run_start = k
        elif not flag and run_start is not None:
            if k - run_start >= need:
                break
            run_start = None
    if run_start is None:
        return None
    k = run_start
    while k < len(decel) and decel[k]:
        k += 1
    if k - run_start < need:
        return None
    return ReactionInterval(float(ped.t[idx[run_start]]), float(ped.t[idx[k - 1]]))


def _velocity_at(track: Trajectory, i: int) -> np.ndarray:
    lo = max(0, i - 1)
    hi = min(len(track.t) - 1, i + 1)
    return (track.xy_smooth[hi] - track.xy_smooth[lo]) / ((hi - lo) * track.period)


def predict_ca_prime(ped: Trajectory, t_d: float, veh: Trajectory,
                     horizon: float = DEFAULT_HORIZON,
                     ped_radius: float = DEFAULT_PED_RADIUS,
                     min_area: float = DEFAULT_MIN_AREA,
                     ) -> Polygon | MultiPolygon | None:
    """Predicted conflict area from linear extrapolation of the t_d state.

    The pedestrian position and velocity at ``t_d`` are held constant over
    ``horizon`` seconds; the resulting corridor is intersected with the
    vehicle's actual swept corridor.
    """
    i = ped.index_at(t_d)
    if i < 0 or i >= len(ped.t):
        raise GeometryError(f"t_d {t_d} outside track span")
    vel = _velocity_at(ped, i)
    speed = float(np.hypot(*vel))
    if speed < _V_EPS:
        raise GeometryError(f"pedestrian speed is zero at t_d {t_d}; no direction defined")
    steps = int(round(horizon / ped.period))
    pos = ped.xy_smooth[i] + np.outer(np.arange(steps + 1) * ped.period, vel)
    footprints = [build_footprint("pedestrian", p[0], p[1], ped_radius=ped_radius)
                  for p in pos]
    corridor = unary_union(footprints)
    overlap = corridor.intersection(swept_corridor(veh).union)
    if overlap.is_empty or overlap.area < min_area:
        return None
    return overlap


def _cumulative_arc_length(track: Trajectory) -> np.ndarray:
    steps = np.hypot(*np.diff(track.xy_smooth, axis=0).T)
    return np.concatenate([[0.0], np.cumsum(steps)])


def _entry_index(veh: Trajectory, polygon) -> tuple[int, bool]:
    for i, fp in enumerate(veh.footprints):
        if fp.intersects(polygon):
            return i, True
    dists = [fp.distance(polygon) for fp in veh.footprints]
    return int(np.argmin(dists)), False


def tta_series(veh: Trajectory, ca_prime, t_d: float) -> TtaSeries:
    """Time-to-approach samples for every instant after t_d until CA' entry.

    Distance is arc length along the vehicle's own future path up to the
    first sample whose footprint touches CA'.  Samples with zero speed carry
    tta None (a gap, not an error).  If the vehicle never reaches CA' the
    series targets the closest-approach sample and is flagged unreached.
    """
    if ca_prime is None or ca_prime.is_empty:
        raise GeometryError("CA' is empty")
    entry, reached = _entry_index(veh, ca_prime)
    cum = _cumulative_arc_length(veh)
    samples = []
    for i in range(len(veh.t)):
        if veh.t[i] <= t_d or i >= entry:
            continue
        d = float(cum[entry] - cum[i])
        v = float(veh.speed[i])
        tta = d / v if v > _V_EPS else None
        samples.append((float(veh.t[i]), d, v, tta))
    return TtaSeries(ca_prime, tuple(samples), reached)


def tta_at(veh: Trajectory, ca_prime, time: float) -> float | None:
    """Point evaluation of time-to-approach at an arbitrary instant.

    Used for annotation times (e.g. a perception moment preceding t_d).
    Returns None when the vehicle is stopped or already inside CA'.
    """
    entry, _reached = _entry_index(veh, ca_prime)
    i = veh.index_at(time)
    if i < 0 or i >= len(veh.t) or i >= entry:
        return None
    cum = _cumulative_arc_length(veh)
    v = float(veh.speed[i])
    if v < _V_EPS:
        return None
    return float(cum[entry] - cum[i]) / v
