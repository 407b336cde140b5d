"""Command-line front end: analyze, plotdata, generate, validate-config."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import yaml

from . import __version__
from . import catalog as cat
from .errors import PviMineError
from .pipeline import RunParams, run_pipeline
from .scene import load_scene
from .synth import default_scene, generate, load_scenario_spec, packaged_scenario
from .trajectory import parse_trajectories, serialize_trajectories

_PARAM_KEYS = tuple(f.name for f in dataclasses.fields(RunParams))
_CONFIG_KEYS = {"trajectories", "format", "scene", "output", "annotations",
                *_PARAM_KEYS}


def _load_run_config(path: str) -> dict:
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise PviMineError(f"run config {path} must be a mapping")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise PviMineError(f"run config {path} has unknown keys: {sorted(unknown)}")
    return doc


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_analyze(args) -> int:
    config = _load_run_config(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            config[key] = val
    for key in ("trajectories", "scene", "output"):
        if key not in config:
            return _fail(f"missing required setting '{key}' (config key or flag)")

    traj_path = Path(config["trajectories"])
    scene_path = Path(config["scene"])
    if not traj_path.exists():
        return _fail(f"trajectory file not found: {traj_path}")
    if not scene_path.exists():
        return _fail(f"scene file not found: {scene_path}")

    fmt = config.get("format", "csv")
    param_kwargs = {k: config[k] for k in _PARAM_KEYS if k in config}
    if config.get("threshold") == "auto":
        param_kwargs["threshold"] = None
    params = RunParams(**param_kwargs)

    annotations = None
    ann_path = config.get("annotations")
    if ann_path:
        with open(ann_path) as fh:
            annotations = yaml.safe_load(fh) or {}

    out_dir = Path(config["output"])
    written: list[Path] = []
    try:
        scene = load_scene(str(scene_path))
        with open(traj_path) as fh:
            tracks = parse_trajectories(fh, fmt)
        result = run_pipeline(tracks, scene, params, annotations)

        manifest = {
            "schema_version": cat.SCHEMA_VERSION,
            "pvimine_version": __version__,
            "parameters": params.to_dict(),
            "threshold_used": result.threshold,
            "inputs": {
                "trajectories": {"path": str(traj_path), "sha256": _sha256(traj_path)},
                "scene": {"path": str(scene_path), "sha256": _sha256(scene_path)},
            },
            "counts": result.counts,
        }

        out_dir.mkdir(parents=True, exist_ok=True)

        def emit(name, records, stats=None):
            for fmt_out in ("jsonl", "csv"):
                path = out_dir / f"{name}.{fmt_out}"
                if fmt_out == "jsonl":
                    cat.write_records_jsonl(records, path)
                else:
                    cat.write_records_csv(records, path)
                written.append(path)

        emit("baseline", result.records)
        emit("pc_pvi", result.pc_records)
        emit("critical", result.critical_records)
        or_path = out_dir / "or_table.csv"
        cat.write_or_table_csv(result.or_rows, or_path)
        written.append(or_path)
        manifest_path = out_dir / "manifest.json"
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(manifest_path)
    except (PviMineError, OSError, ValueError) as exc:
        for path in written:
            path.unlink(missing_ok=True)
        return _fail(str(exc))

    for stage in ("crossing_pedestrians", "baseline_pairs", "pc_pvis", "critical_pvis"):
        print(f"{stage}: {result.counts[stage]}")
    return 0


def _read_jsonl(path: Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def cmd_plotdata(args) -> int:
    run_dir = Path(args.run_dir)
    pc_path = run_dir / "pc_pvi.jsonl"
    if not pc_path.exists():
        return _fail(f"no analyze outputs found at {run_dir} (missing {pc_path.name})")
    pc = _read_jsonl(pc_path)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)

    if args.which == "pet_vs_std":
        path = out / "pet_vs_std.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pedestrian_id", "vehicle_id", "pet",
                             "residual_std", "motion_class"])
            for rec in pc:
                writer.writerow([rec["pedestrian_id"], rec["vehicle_id"],
                                 rec["pet"], rec["residual_std"],
                                 rec["motion_class"]])
    elif args.which == "speed_profiles":
        path = out / "speed_profiles.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pedestrian_id", "vehicle_id", "t_aligned", "v",
                             "motion_class", "pet"])
            for rec in pc:
                profile = rec.get("speed_profile") or []
                if not profile:
                    continue
                t0 = profile[0][0]  # aligned to approach-zone exit (ROI entry)
                for t, v in profile:
                    writer.writerow([rec["pedestrian_id"], rec["vehicle_id"],
                                     round(t - t0, 9), v,
                                     rec["motion_class"], rec["pet"]])
    elif args.which == "timeline":
        crit_path = run_dir / "critical.jsonl"
        source = _read_jsonl(crit_path) if crit_path.exists() else pc
        if args.record:
            ped_id, _, veh_id = args.record.partition(":")
            source = [r for r in source
                      if r["pedestrian_id"] == ped_id and r["vehicle_id"] == veh_id]
            if not source:
                return _fail(f"record {args.record!r} not found")
        path = out / "timeline.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pedestrian_id", "vehicle_id", "series", "t", "value"])
            for rec in source:
                for t, v in rec.get("speed_profile") or []:
                    writer.writerow([rec["pedestrian_id"], rec["vehicle_id"],
                                     "ped_speed", t, v])
                for t, _d, v, tta in rec.get("tta_samples") or []:
                    writer.writerow([rec["pedestrian_id"], rec["vehicle_id"],
                                     "veh_speed", t, v])
                    if tta is not None:
                        writer.writerow([rec["pedestrian_id"], rec["vehicle_id"],
                                         "tta", t, tta])
    print(f"wrote {path}")
    return 0


def cmd_generate(args) -> int:
    try:
        if args.packaged:
            spec = packaged_scenario(args.packaged)
        elif args.spec:
            spec = load_scenario_spec(args.spec)
        else:
            return _fail("provide --spec FILE or --packaged NAME")
        ped, veh, truth = generate(spec)
    except PviMineError as exc:
        return _fail(str(exc))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectories.csv").write_text(serialize_trajectories([ped, veh], "csv"))
    truth_doc = dataclasses.asdict(truth)
    (out / "truth.yaml").write_text(yaml.safe_dump(truth_doc, sort_keys=True))
    from importlib import resources
    scene_text = resources.files("pvimine.data").joinpath("default_scene.yaml").read_text()
    (out / "scene.yaml").write_text(scene_text)
    print(f"wrote {out}/trajectories.csv (truth PET {truth.pet:+.3f} s, "
          f"{truth.constellation})")
    return 0


def cmd_validate_config(args) -> int:
    status = 0
    if args.scene:
        try:
            scene = load_scene(args.scene)
            print(f"scene ok: {len(scene.zones)} zones, {len(scene.lanes)} lanes")
        except (PviMineError, OSError) as exc:
            status = _fail(f"scene: {exc}")
    if args.run:
        try:
            config = _load_run_config(args.run)
            RunParams(**{k: config[k] for k in _PARAM_KEYS if k in config
                         and config[k] != "auto"})
            print(f"run config ok: {len(config)} settings")
        except (PviMineError, OSError, TypeError) as exc:
            status = _fail(f"run config: {exc}")
    if not args.scene and not args.run:
        return _fail("provide --scene and/or --run")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pvimine",
        description="Mine critical pedestrian-vehicle interactions from "
                    "trajectory data.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the full mining pipeline")
    analyze.add_argument("--config", help="run config YAML; flags override it")
    analyze.add_argument("--trajectories")
    analyze.add_argument("--scene")
    analyze.add_argument("--output")
    analyze.add_argument("--format", choices=["csv", "jsonl"])
    analyze.add_argument("--annotations")
    for key in _PARAM_KEYS:
        if key == "min_fit_samples":
            analyze.add_argument("--min-fit-samples", dest=key, type=int)
        elif key == "threshold":
            analyze.add_argument("--threshold",
                                 help="fixed residual-std threshold in m/s, "
                                      "or 'auto' for the dataset percentile")
        else:
            analyze.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    analyze.set_defaults(func=cmd_analyze)

    plotdata = sub.add_parser("plotdata", help="emit tidy CSVs from a finished run")
    plotdata.add_argument("run_dir")
    plotdata.add_argument("--which", required=True,
                          choices=["speed_profiles", "pet_vs_std", "timeline"])
    plotdata.add_argument("--record", help="ped_id:veh_id for a single timeline")
    plotdata.add_argument("--out")
    plotdata.set_defaults(func=cmd_plotdata)

    gen = sub.add_parser("generate", help="generate a synthetic scenario")
    gen.add_argument("--spec", help="scenario YAML")
    gen.add_argument("--packaged", help="name of a packaged scenario "
                                        "(e.g. critical_replay)")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    val = sub.add_parser("validate-config", help="check scene / run config files")
    val.add_argument("--scene")
    val.add_argument("--run")
    val.set_defaults(func=cmd_validate_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threshold", None) not in (None, "auto"):
        args.threshold = float(args.threshold)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
