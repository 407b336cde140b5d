"""Mining critical pedestrian-vehicle interactions from trajectory data.

Combines the post-encroachment-time space-sharing-conflict metric with a
quadratic-fit motion-adaption metric to distill a catalog of critical
pedestrian-vehicle interactions from raw trajectory recordings.
"""

__version__ = "0.1.0"

from .catalog import (
    Band,
    ContingencyRow,
    PviRecord,
    export_catalog,
    filter_critical,
    filter_pc_pvi,
    odds_ratio_ci,
    odds_ratio_table,
    select_min_abs_pet,
)
from .conflict import (
    ConflictArea,
    PetResult,
    ReactionInterval,
    TtaSeries,
    conflict_area,
    detect_reaction,
    pet,
    predict_ca_prime,
    tta_at,
    tta_series,
)
from .errors import ConfigError, FitError, GeometryError, PviMineError, SchemaError
from .motion import (
    MotionClass,
    QuadraticFit,
    classify,
    dataset_threshold,
    fit_quadratic,
)
from .pairing import CandidatePair, build_baseline_catalog, is_moving
from .pipeline import RunParams, RunResult, run_pipeline
from .scene import (
    SceneConfig,
    SweptCorridor,
    classify_conflict_situation,
    classify_zone_transition,
    load_scene,
    polygon_intersection,
    swept_corridor,
)
from .synth import (
    PedReaction,
    ScenarioSpec,
    ScenarioTruth,
    default_scene,
    generate,
    load_scenario_spec,
    packaged_scenario,
    scenario_truth,
)
from .trajectory import (
    RawTrack,
    Trajectory,
    build_footprint,
    parse_trajectories,
    resample_and_smooth,
    serialize_trajectories,
)
