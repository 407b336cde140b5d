"""Baseline catalog: pedestrian-vehicle pairs with temporal overlap.

A pair enters the baseline catalog when the two tracks share a time window,
the vehicle shows sustained motion inside that window, and the pedestrian
has a valid approach-to-target zone transition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import SceneConfig, classify_zone_transition
from .trajectory import VEHICLE_CLASSES, Trajectory

#: speed below this counts as standing still (tracking noise floor), m/s
DEFAULT_SPEED_EPS = 0.1
#: minimum contiguous moving time, seconds
DEFAULT_MIN_DURATION = 0.5


@dataclass(frozen=True)
class CandidatePair:
    pedestrian_id: str
    vehicle_id: str
    vehicle_class: str
    overlap_window: tuple[float, float]


def is_moving(vehicle: Trajectory, window: tuple[float, float],
              speed_eps: float = DEFAULT_SPEED_EPS,
              min_duration: float = DEFAULT_MIN_DURATION) -> bool:
    """True iff speed exceeds ``speed_eps`` for a contiguous run >= ``min_duration``."""
    t0, t1 = window
    mask = (vehicle.t >= t0 - 1e-9) & (vehicle.t <= t1 + 1e-9)
    fast = vehicle.speed[mask] > speed_eps
    if not fast.any():
        return False
    need = int(round(min_duration / vehicle.period)) + 1
    run = 0
    for flag in fast:
        run = run + 1 if flag else 0
        if run >= need:
            return True
    return False


def build_baseline_catalog(pedestrians: list[Trajectory], vehicles: list[Trajectory],
                           scene: SceneConfig,
                           speed_eps: float = DEFAULT_SPEED_EPS,
                           min_duration: float = DEFAULT_MIN_DURATION,
                           transitions: dict[str, tuple[str, str]] | None = None,
                           ) -> list[CandidatePair]:
    """All (crossing pedestrian, moving vehicle) pairs with temporal overlap.

    ``transitions`` may carry precomputed zone transitions keyed by
    pedestrian id; pedestrians without a valid transition are dropped before
    pairing.  The result is sorted by (pedestrian_id, overlap start).
    """
    if transitions is None:
        transitions = {}
        for ped in pedestrians:
            tr = classify_zone_transition(ped, scene)
            if tr is not None:
                transitions[ped.track_id] = tr

    pairs = []
    for ped in pedestrians:
        if ped.track_id not in transitions:
            continue
        for veh in vehicles:
            if veh.cls not in VEHICLE_CLASSES:
                raise ValueError(f"track '{veh.track_id}' has class {veh.cls!r}, "
                                 "expected a vehicle")
            t0 = max(ped.t_s, veh.t_s)
            t1 = min(ped.t_e, veh.t_e)
            if t1 <= t0:
                continue
            if not is_moving(veh, (t0, t1), speed_eps, min_duration):
                continue
            pairs.append(CandidatePair(ped.track_id, veh.track_id, veh.cls, (t0, t1)))
    pairs.sort(key=lambda p: (p.pedestrian_id, p.overlap_window[0], p.vehicle_id))
    return pairs
