"""Record assembly, criticality filters, odds-ratio statistics, export.

One :class:`PviRecord` describes a single pedestrian-vehicle pair after the
metric stage.  Per pedestrian, the pair with the smallest absolute PET is
flagged as the one with the highest behavioral impact; statistics and the
critical catalog operate on those selected records only.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .conflict import ReactionInterval, VEHICLE_FIRST
from .motion import NON_ORDINARY

SCHEMA_VERSION = 1

#: PC-PVI window half-width, seconds (pairs with PET in [-4, 4])
DEFAULT_PC_WINDOW = 4.0
#: criticality bound on |PET|, seconds (strict)
DEFAULT_CRITICAL_PET = 2.0

Z_95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class PviRecord:
    pedestrian_id: str
    vehicle_id: str
    vehicle_class: str
    constellation: str | None = None
    conflict_situation: str | None = None
    zone_transition: tuple[str, str] | None = None
    pet: float | None = None
    t_entry_veh: float | None = None
    residual_std: float | None = None
    motion_class: str | None = None
    reaction: ReactionInterval | None = None
    tta_at: tuple[float, float] | None = None  # (t, tta) at annotation t_p, else t_d
    co_occupied: bool = False
    selected: bool = False
    speed_profile: tuple = field(default=(), repr=False)  # (t, v) over the ROI window
    tta_samples: tuple = field(default=(), repr=False)  # (t, d, v, tta) after t_d


@dataclass(frozen=True)
class Band:
    """PET interval [lo, hi) or [lo, hi] for a contingency row."""

    lo: float
    hi: float
    include_hi: bool = False

    def contains(self, pet: float) -> bool:
        if self.include_hi:
            return self.lo <= pet <= self.hi
        return self.lo <= pet < self.hi

    @property
    def label(self) -> str:
        return f"{self.lo:g}..{self.hi:g}"


#: the four report bands plus the overall PC-PVI row
DEFAULT_BANDS = (
    Band(-4.0, -2.0),
    Band(-2.0, 0.0),
    Band(0.0, 2.0),
    Band(2.0, 4.0, include_hi=True),
    Band(-4.0, 4.0, include_hi=True),
)


@dataclass(frozen=True)
class ContingencyRow:
    band: Band
    n_nonordinary_in: int
    n_ordinary_in: int
    n_nonordinary_out: int
    n_ordinary_out: int
    odds_ratio: float | None
    ci95: tuple[float, float] | None
    share_pct: float
    haldane_corrected: bool = False


def select_min_abs_pet(records: list[PviRecord]) -> list[PviRecord]:
    """Flag, per pedestrian, the record with the smallest absolute PET.

    Ties prefer the vehicle-first record (the more conservative reading),
    then the earlier vehicle entry into the conflict area.
    """
    by_ped: dict[str, list[PviRecord]] = {}
    for rec in records:
        by_ped.setdefault(rec.pedestrian_id, []).append(rec)

    out = []
    for rec_list in by_ped.values():
        with_pet = [r for r in rec_list if r.pet is not None]
        chosen = None
        if with_pet:
            chosen = min(with_pet, key=lambda r: (
                abs(r.pet),
                0 if r.constellation == VEHICLE_FIRST else 1,
                r.t_entry_veh if r.t_entry_veh is not None else math.inf,
            ))
        for rec in rec_list:
            out.append(dataclasses.replace(rec, selected=rec is chosen))
    out.sort(key=lambda r: (r.pedestrian_id, r.vehicle_id))
    return out


def filter_pc_pvi(records: list[PviRecord],
                  window: float = DEFAULT_PC_WINDOW) -> list[PviRecord]:
    """Selected records with PET inside the closed [-window, window] interval."""
    return [r for r in records
            if r.selected and r.pet is not None and -window <= r.pet <= window]


def filter_critical(records: list[PviRecord],
                    pet_abs_max: float = DEFAULT_CRITICAL_PET) -> list[PviRecord]:
    """Records with |PET| strictly below the bound and non-ordinary motion."""
    return [r for r in records
            if r.pet is not None and abs(r.pet) < pet_abs_max
            and r.motion_class == NON_ORDINARY]


def odds_ratio_ci(a: float, b: float, c: float, d: float,
                  z: float = Z_95) -> tuple[float, tuple[float, float], bool]:
    """Woolf log-OR confidence interval with Haldane-Anscombe correction.

    Adds 0.5 to every cell when any cell is zero; returns (OR, (lo, hi),
    corrected-flag).
    """
    corrected = 0 in (a, b, c, d)
    if corrected:
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    odds = (a * d) / (b * c)
    se = math.sqrt(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d)
    log_or = math.log(odds)
    return odds, (math.exp(log_or - z * se), math.exp(log_or + z * se)), corrected


def odds_ratio_table(population_labels: dict[str, str],
                     pc_records: list[PviRecord],
                     bands=DEFAULT_BANDS) -> list[ContingencyRow]:
    """Per-band 2x2 tables of (in band vs. rest of population) x motion class.

    ``population_labels`` maps every classified pedestrian id to its motion
    label; the reference group of each band is every pedestrian trajectory
    outside the band.
    """
    total = len(population_labels)
    total_nonord = sum(1 for lab in population_labels.values() if lab == NON_ORDINARY)
    total_ord = total - total_nonord

    rows = []
    for band in bands:
        in_band = [r for r in pc_records if r.pet is not None and band.contains(r.pet)]
        a = sum(1 for r in in_band if r.motion_class == NON_ORDINARY)
        b = len(in_band) - a
        c = total_nonord - a
        d = total_ord - b
        share = 100.0 * (a + b) / total if total else 0.0
        if a + b == 0:
            rows.append(ContingencyRow(band, a, b, c, d, None, None, share))
            continue
        odds, ci, corrected = odds_ratio_ci(a, b, c, d)
        rows.append(ContingencyRow(band, a, b, c, d, odds, ci, share, corrected))
    return rows


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

RECORD_COLUMNS = (
    "pedestrian_id", "vehicle_id", "vehicle_class", "constellation",
    "conflict_situation", "approach_zone", "target_zone", "pet",
    "residual_std", "motion_class", "t_d", "t_f", "t_p", "tta_time",
    "tta_value", "co_occupied", "selected",
)


def record_to_flat(rec: PviRecord) -> dict:
    """Scalar projection of a record, in the fixed export column order."""
    approach, target = rec.zone_transition if rec.zone_transition else (None, None)
    t_d = rec.reaction.t_d if rec.reaction else None
    t_f = rec.reaction.t_f if rec.reaction else None
    t_p = rec.reaction.t_p if rec.reaction else None
    tta_time, tta_value = rec.tta_at if rec.tta_at else (None, None)
    return {
        "pedestrian_id": rec.pedestrian_id,
        "vehicle_id": rec.vehicle_id,
        "vehicle_class": rec.vehicle_class,
        "constellation": rec.constellation,
        "conflict_situation": rec.conflict_situation,
        "approach_zone": approach,
        "target_zone": target,
        "pet": rec.pet,
        "residual_std": rec.residual_std,
        "motion_class": rec.motion_class,
        "t_d": t_d,
        "t_f": t_f,
        "t_p": t_p,
        "tta_time": tta_time,
        "tta_value": tta_value,
        "co_occupied": rec.co_occupied,
        "selected": rec.selected,
    }


def record_to_dict(rec: PviRecord) -> dict:
    """Full JSON projection, including the embedded profile/TTA series."""
    out = {"schema_version": SCHEMA_VERSION}
    out.update(record_to_flat(rec))
    out["speed_profile"] = [[round(t, 9), round(v, 9)] for t, v in rec.speed_profile]
    # (t, distance-to-CA', vehicle speed, tta-or-None)
    out["tta_samples"] = [
        [round(t, 9), round(d, 9), round(v, 9),
         None if tta is None else round(tta, 9)]
        for t, d, v, tta in rec.tta_samples
    ]
    return out


def _sorted_records(records):
    return sorted(records, key=lambda r: (r.pedestrian_id, r.vehicle_id))


def write_records_jsonl(records: list[PviRecord], path) -> None:
    with open(path, "w") as fh:
        for rec in _sorted_records(records):
            fh.write(json.dumps(record_to_dict(rec)) + "\n")


def write_records_csv(records: list[PviRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RECORD_COLUMNS)
        writer.writeheader()
        for rec in _sorted_records(records):
            flat = record_to_flat(rec)
            writer.writerow({k: ("" if flat[k] is None else flat[k])
                             for k in RECORD_COLUMNS})


def write_or_table_csv(rows: list[ContingencyRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pet_band", "share_pct", "n_ordinary", "n_nonordinary",
                         "odds_ratio", "ci95_lo", "ci95_hi", "haldane_corrected"])
        for row in rows:
            writer.writerow([
                row.band.label, round(row.share_pct, 6),
                row.n_ordinary_in, row.n_nonordinary_in,
                "" if row.odds_ratio is None else round(row.odds_ratio, 6),
                "" if row.ci95 is None else round(row.ci95[0], 6),
                "" if row.ci95 is None else round(row.ci95[1], 6),
                row.haldane_corrected,
            ])


def export_catalog(records: list[PviRecord], stats: list[ContingencyRow] | None,
                   path, format: str = "jsonl",
                   manifest: dict | None = None) -> list[str]:
    """Write a catalog (plus optional OR table and manifest sidecar).

    ``path`` is a prefix; the record file gets the format extension, the
    statistics ``_or_table.csv`` and the manifest ``_manifest.json``.
    Output is deterministic for identical inputs.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    record_path = path.with_name(path.name + f".{format}")
    if format == "jsonl":
        write_records_jsonl(records, record_path)
    elif format == "csv":
        write_records_csv(records, record_path)
    else:
        raise ValueError(f"unknown format {format!r}")
    written.append(str(record_path))
    if stats is not None:
        stats_path = path.with_name(path.name + "_or_table.csv")
        write_or_table_csv(stats, stats_path)
        written.append(str(stats_path))
    if manifest is not None:
        manifest_path = path.with_name(path.name + "_manifest.json")
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(str(manifest_path))
    return written
