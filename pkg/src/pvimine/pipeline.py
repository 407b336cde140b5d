"""End-to-end pipeline: ingest -> pair -> metrics -> classify -> catalog.

Pure orchestration over the metric modules; the CLI wraps this with file
I/O.  All parameters are collected in :class:`RunParams` so a run is fully
described by (input tracks, scene, params).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from shapely.geometry import Point

from . import catalog as cat
from . import conflict as cf
from . import motion as mo
from . import pairing as pr
from .errors import GeometryError
from .scene import SceneConfig, classify_conflict_situation, classify_zone_transition
from .trajectory import RawTrack, Trajectory, resample_and_smooth


@dataclass(frozen=True)
class RunParams:
    period: float = 0.04
    smooth_window: float = 0.52
    ped_radius: float = 0.3
    speed_eps: float = pr.DEFAULT_SPEED_EPS
    min_duration: float = pr.DEFAULT_MIN_DURATION
    a_thresh: float = cf.DEFAULT_A_THRESH
    min_len: float = cf.DEFAULT_MIN_LEN
    min_area: float = cf.DEFAULT_MIN_AREA
    horizon: float = cf.DEFAULT_HORIZON
    pc_window: float = cat.DEFAULT_PC_WINDOW
    critical_pet: float = cat.DEFAULT_CRITICAL_PET
    percentile: float = mo.DEFAULT_PERCENTILE
    threshold: float | None = mo.DEFAULT_THRESHOLD  # None -> derive from percentile
    min_fit_samples: int = mo.MIN_FIT_SAMPLES

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    records: list = field(default_factory=list)
    pc_records: list = field(default_factory=list)
    critical_records: list = field(default_factory=list)
    or_rows: list = field(default_factory=list)
    labels: dict = field(default_factory=dict)  # ped_id -> motion label
    fits: dict = field(default_factory=dict)  # ped_id -> QuadraticFit
    threshold: float | None = None
    counts: dict = field(default_factory=dict)


def roi_window(ped: Trajectory, scene: SceneConfig) -> tuple[float, float] | None:
    """First-to-last time the smoothed footprint center is inside the ROI."""
    inside = np.array([scene.roi.covers(Point(xy)) for xy in ped.xy_smooth])
    if not inside.any():
        return None
    first = int(np.argmax(inside))
    last = len(inside) - 1 - int(np.argmax(inside[::-1]))
    return float(ped.t[first]), float(ped.t[last])


def run_pipeline(tracks: list[RawTrack], scene: SceneConfig,
                 params: RunParams = RunParams(),
                 annotations: dict | None = None) -> RunResult:
    """Run the full mining pipeline over raw tracks.

    ``annotations`` optionally maps pedestrian ids to side information
    gathered outside this pipeline, currently ``{"t_p": seconds}`` for the
    manually observed perception moment.
    """
    annotations = annotations or {}
    result = RunResult()

    peds, vehicles = [], []
    for raw in tracks:
        traj = resample_and_smooth(raw, params.period, params.smooth_window,
                                   params.ped_radius)
        (peds if traj.cls == "pedestrian" else vehicles).append(traj)

    transitions: dict[str, tuple[str, str]] = {}
    roi_windows: dict[str, tuple[float, float]] = {}
    for ped in peds:
        tr = classify_zone_transition(ped, scene)
        if tr is None:
            continue
        win = roi_window(ped, scene)
        if win is None:
            continue
        transitions[ped.track_id] = tr
        roi_windows[ped.track_id] = win
    crossing = [p for p in peds if p.track_id in transitions]

    # motion-adaption metric over every crossing pedestrian
    profiles: dict[str, tuple] = {}
    skipped_short = 0
    for ped in crossing:
        t0, t1 = roi_windows[ped.track_id]
        mask = (ped.t >= t0 - 1e-9) & (ped.t <= t1 + 1e-9)
        if mask.sum() < params.min_fit_samples:
            skipped_short += 1
            continue
        fit = mo.fit_quadratic(ped.t[mask], ped.speed[mask],
                               min_samples=params.min_fit_samples)
        result.fits[ped.track_id] = fit
        profiles[ped.track_id] = tuple(
            (float(t), float(v)) for t, v in zip(ped.t[mask], ped.speed[mask]))

    if params.threshold is not None:
        threshold = params.threshold
    elif result.fits:
        threshold = mo.dataset_threshold(
            [f.residual_std for f in result.fits.values()], params.percentile)
    else:
        threshold = mo.DEFAULT_THRESHOLD
    result.threshold = threshold
    result.labels = {pid: mo.classify(fit, threshold).label
                     for pid, fit in result.fits.items()}

    pairs = pr.build_baseline_catalog(crossing, vehicles, scene,
                                      params.speed_eps, params.min_duration,
                                      transitions=transitions)

    ped_by_id = {p.track_id: p for p in crossing}
    veh_by_id = {v.track_id: v for v in vehicles}
    reactions: dict[str, cf.ReactionInterval | None] = {}

    records = []
    with_ca = 0
    for pair in pairs:
        ped = ped_by_id[pair.pedestrian_id]
        veh = veh_by_id[pair.vehicle_id]
        transition = transitions[pair.pedestrian_id]
        fit = result.fits.get(pair.pedestrian_id)
        label = result.labels.get(pair.pedestrian_id)

        ca = cf.conflict_area(pair, ped, veh, scene, params.min_area)
        pet_res = cf.pet(ca) if ca is not None else None
        if ca is not None:
            with_ca += 1

        try:
            situation = classify_conflict_situation(veh, transition[0], scene)
        except GeometryError:
            situation = None

        if pair.pedestrian_id not in reactions:
            reactions[pair.pedestrian_id] = cf.detect_reaction(
                ped, roi_windows[pair.pedestrian_id],
                params.a_thresh, params.min_len)
        reaction = reactions[pair.pedestrian_id]
        t_p = annotations.get(pair.pedestrian_id, {}).get("t_p")
        if reaction is not None and t_p is not None:
            reaction = cf.ReactionInterval(reaction.t_d, reaction.t_f, t_p)

        records.append(cat.PviRecord(
            pedestrian_id=pair.pedestrian_id,
            vehicle_id=pair.vehicle_id,
            vehicle_class=pair.vehicle_class,
            constellation=pet_res.constellation if pet_res else None,
            conflict_situation=situation,
            zone_transition=transition,
            pet=pet_res.pet if pet_res else None,
            t_entry_veh=ca.t_entry_veh if ca else None,
            residual_std=fit.residual_std if fit else None,
            motion_class=label,
            reaction=reaction,
            co_occupied=pet_res.co_occupied if pet_res else False,
            speed_profile=profiles.get(pair.pedestrian_id, ()),
        ))

    records = cat.select_min_abs_pet(records)
    pc = cat.filter_pc_pvi(records, params.pc_window)
    critical = cat.filter_critical(pc, params.critical_pet)

    # predictive metrics only for the critical subset
    critical_keys = {(r.pedestrian_id, r.vehicle_id) for r in critical}
    if critical_keys:
        updated = []
        for rec in records:
            if (rec.pedestrian_id, rec.vehicle_id) in critical_keys:
                rec = _attach_tta(rec, ped_by_id[rec.pedestrian_id],
                                  veh_by_id[rec.vehicle_id], params)
            updated.append(rec)
        records = updated
        pc = cat.filter_pc_pvi(records, params.pc_window)
        critical = cat.filter_critical(pc, params.critical_pet)

    result.records = records
    result.pc_records = pc
    result.critical_records = critical
    result.or_rows = cat.odds_ratio_table(result.labels, pc)
    result.counts = {
        "tracks": len(tracks),
        "pedestrians": len(peds),
        "vehicles": len(vehicles),
        "crossing_pedestrians": len(crossing),
        "classified_pedestrians": len(result.fits),
        "skipped_short_fits": skipped_short,
        "baseline_pairs": len(pairs),
        "pairs_with_conflict_area": with_ca,
        "pc_pvis": len(pc),
        "critical_pvis": len(critical),
    }
    return result


def _attach_tta(rec, ped: Trajectory, veh: Trajectory, params: RunParams):
    """Fill tta fields on a critical record; silently skips when undefined."""
    import dataclasses

    if rec.reaction is None:
        return rec
    try:
        ca_prime = cf.predict_ca_prime(ped, rec.reaction.t_d, veh,
                                       params.horizon, params.ped_radius,
                                       params.min_area)
    except GeometryError:
        return rec
    if ca_prime is None:
        return rec
    series = cf.tta_series(veh, ca_prime, rec.reaction.t_d)
    eval_t = rec.reaction.t_p if rec.reaction.t_p is not None else rec.reaction.t_d
    tta_val = cf.tta_at(veh, ca_prime, eval_t)
    return dataclasses.replace(
        rec,
        tta_samples=series.samples,
        tta_at=(eval_t, tta_val) if tta_val is not None else None,
    )
