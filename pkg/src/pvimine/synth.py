"""Synthetic crossing scenarios with closed-form ground truth.

The generator lays a straight pedestrian crossing over the packaged
two-zone / two-lane scene and emits raw tracks in the interchange schema,
together with analytic entry/exit times, PET, and deceleration onset.
Position noise is added after the truth is computed, so the oracle values
stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from .errors import ConfigError
from .scene import SceneConfig, load_scene
from .trajectory import DEFAULT_PED_RADIUS, DEFAULT_PERIOD, RawTrack

VEHICLE_DIMS = {"car": (4.5, 1.8), "bicycle": (1.8, 0.6)}

#: crossing-line x and pedestrian start/end y in the packaged scene
CROSS_X = 0.0
PED_Y_START = -3.0
PED_Y_END = 10.0
#: lane center lines in the packaged scene
LANE_CENTER = {"near": 1.75, "far": 5.25}
LANE_DIRECTION = {"near": 1.0, "far": -1.0}


def default_scene() -> SceneConfig:
    """The packaged two-zone, two-lane crossing layout."""
    text = resources.files("pvimine.data").joinpath("default_scene.yaml").read_text()
    return load_scene(text)


@dataclass(frozen=True)
class PedReaction:
    """Deceleration to a full stop, a hold, and re-acceleration."""

    t_d_true: float
    decel: float
    stop_duration: float


@dataclass(frozen=True)
class ScenarioSpec:
    ped_speed: float = 1.4
    veh_speed: float = 8.0
    veh_lane: str = "near"
    veh_class: str = "car"
    time_offset: float = 2.5
    ped_reaction: PedReaction | None = None
    noise_sigma: float = 0.0
    seed: int = 0
    period: float = DEFAULT_PERIOD
    ped_radius: float = DEFAULT_PED_RADIUS

    def validate(self) -> None:
        if self.ped_speed <= 0 or self.veh_speed <= 0:
            raise ConfigError("speeds must be > 0")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if self.veh_lane not in LANE_CENTER:
            raise ConfigError(f"veh_lane must be near or far, got {self.veh_lane!r}")
        if self.veh_class not in VEHICLE_DIMS:
            raise ConfigError(f"veh_class must be car or bicycle, got {self.veh_class!r}")
        if self.ped_reaction is not None and self.ped_reaction.decel <= 0:
            raise ConfigError("reaction decel must be > 0")


@dataclass(frozen=True)
class ScenarioTruth:
    """Analytic per-scenario ground truth (noise-free kinematics)."""

    pet: float
    constellation: str  # pedestrian_first / vehicle_first / co_occupied
    ped_entry: float
    ped_exit: float
    veh_entry: float
    veh_exit: float
    t_d: float | None
    ped_cross_time: float
    veh_cross_time: float


class _PedMotion:
    """Piecewise-constant-acceleration motion along +y."""

    def __init__(self, spec: ScenarioSpec):
        vp = spec.ped_speed
        segs = []  # (t0, y0, v0, a)
        if spec.ped_reaction is None:
            segs.append((0.0, PED_Y_START, vp, 0.0))
        else:
            r = spec.ped_reaction
            t_stop = r.t_d_true + vp / r.decel
            t_resume = t_stop + r.stop_duration
            t_full = t_resume + vp / r.decel
            segs.append((0.0, PED_Y_START, vp, 0.0))
            y = PED_Y_START + vp * r.t_d_true
            segs.append((r.t_d_true, y, vp, -r.decel))
            y += vp ** 2 / (2.0 * r.decel)
            segs.append((t_stop, y, 0.0, 0.0))
            segs.append((t_resume, y, 0.0, r.decel))
            y += vp ** 2 / (2.0 * r.decel)
            segs.append((t_full, y, vp, 0.0))
        self.segs = segs

    def y(self, t: float) -> float:
        seg = self.segs[0]
        for cand in self.segs:
            if cand[0] <= t:
                seg = cand
            else:
                break
        t0, y0, v0, a = seg
        dt = t - t0
        return y0 + v0 * dt + 0.5 * a * dt * dt

    def speed(self, t: float) -> float:
        seg = self.segs[0]
        for cand in self.segs:
            if cand[0] <= t:
                seg = cand
            else:
                break
        t0, _y0, v0, a = seg
        return max(0.0, v0 + a * (t - t0))

    def first_time_at(self, y_target: float, t_max: float = 1e4) -> float:
        """Smallest t with y(t) >= y_target (y is nondecreasing)."""
        if self.y(0.0) >= y_target:
            return 0.0
        if self.y(t_max) < y_target:
            raise ConfigError(f"pedestrian never reaches y = {y_target}")
        lo, hi = 0.0, t_max
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            if self.y(mid) >= y_target:
                hi = mid
            else:
                lo = mid
        return hi


def scenario_truth(spec: ScenarioSpec) -> ScenarioTruth:
    """Closed-form conflict-area entry/exit times and signed PET."""
    spec.validate()
    length, width = VEHICLE_DIMS[spec.veh_class]
    y_lane = LANE_CENTER[spec.veh_lane]
    radius = spec.ped_radius
    motion = _PedMotion(spec)

    ped_cross = motion.first_time_at(y_lane)
    veh_cross = ped_cross + spec.time_offset

    ped_entry = motion.first_time_at(y_lane - width / 2.0 - radius)
    ped_exit = motion.first_time_at(y_lane + width / 2.0 + radius)
    half = (radius + length / 2.0) / spec.veh_speed
    veh_entry = veh_cross - half
    veh_exit = veh_cross + half

    if ped_exit <= veh_entry:
        pet_val, constellation = veh_entry - ped_exit, "pedestrian_first"
    elif veh_exit <= ped_entry:
        pet_val, constellation = veh_exit - ped_entry, "vehicle_first"
    else:
        pet_val, constellation = 0.0, "co_occupied"
    t_d = spec.ped_reaction.t_d_true if spec.ped_reaction else None
    return ScenarioTruth(pet_val, constellation, ped_entry, ped_exit,
                         veh_entry, veh_exit, t_d, ped_cross, veh_cross)


def generate(spec: ScenarioSpec) -> tuple[RawTrack, RawTrack, ScenarioTruth]:
    """Raw pedestrian and vehicle tracks plus the analytic ground truth."""
    truth = scenario_truth(spec)
    length, width = VEHICLE_DIMS[spec.veh_class]
    y_lane = LANE_CENTER[spec.veh_lane]
    direction = LANE_DIRECTION[spec.veh_lane]
    motion = _PedMotion(spec)

    t_end = max(motion.first_time_at(PED_Y_END), truth.veh_cross_time + 2.0) + 0.8
    n = int(math.floor(t_end / spec.period)) + 1
    t = spec.period * np.arange(n)

    ped_y = np.array([motion.y(ti) for ti in t])
    ped_x = np.full(n, CROSS_X)
    veh_x = CROSS_X + direction * spec.veh_speed * (t - truth.veh_cross_time)
    veh_y = np.full(n, y_lane)
    heading = 0.0 if direction > 0 else math.pi

    rng = np.random.default_rng(spec.seed)
    if spec.noise_sigma > 0:
        ped_x = ped_x + rng.normal(0.0, spec.noise_sigma, n)
        ped_y = ped_y + rng.normal(0.0, spec.noise_sigma, n)
        veh_x = veh_x + rng.normal(0.0, spec.noise_sigma, n)
        veh_y = veh_y + rng.normal(0.0, spec.noise_sigma, n)

    nan = np.full(n, np.nan)
    ped = RawTrack("ped", "pedestrian", t, ped_x, ped_y,
                   nan.copy(), nan.copy(), nan.copy())
    veh = RawTrack("veh", spec.veh_class, t, veh_x, veh_y,
                   np.full(n, length), np.full(n, width), np.full(n, heading))
    return ped, veh, truth


_SPEC_KEYS = {"ped_speed", "veh_speed", "veh_lane", "veh_class", "time_offset",
              "ped_reaction", "noise_sigma", "seed", "period", "ped_radius"}
_REACTION_KEYS = {"t_d_true", "decel", "stop_duration"}


def load_scenario_spec(source) -> ScenarioSpec:
    """Read a :class:`ScenarioSpec` from a YAML path, stream, or string."""
    if hasattr(source, "read"):
        doc = yaml.safe_load(source)
    elif isinstance(source, str) and "\n" not in source and source.endswith((".yaml", ".yml")):
        with open(source) as fh:
            doc = yaml.safe_load(fh)
    else:
        doc = yaml.safe_load(source)
    if not isinstance(doc, dict):
        raise ConfigError("scenario file must be a mapping")
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"scenario file has unknown keys: {sorted(unknown)}")
    reaction = None
    if doc.get("ped_reaction") is not None:
        rdoc = doc["ped_reaction"]
        bad = set(rdoc) - _REACTION_KEYS
        if bad:
            raise ConfigError(f"ped_reaction has unknown keys: {sorted(bad)}")
        reaction = PedReaction(float(rdoc["t_d_true"]), float(rdoc["decel"]),
                               float(rdoc["stop_duration"]))
    kwargs = {k: doc[k] for k in doc if k != "ped_reaction"}
    spec = ScenarioSpec(ped_reaction=reaction, **kwargs)
    spec.validate()
    return spec


def packaged_scenario(name: str) -> ScenarioSpec:
    """Load one of the scenario files shipped with the package."""
    text = resources.files("pvimine.data").joinpath(f"{name}.yaml").read_text()
    return load_scenario_spec(text)
