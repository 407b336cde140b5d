import filecmp
import json
from pathlib import Path

import pytest
import yaml

from pvimine.cli import main

CSV_HEADER = "track_id,class,t,x,y,length,width,heading\n"

ANALYZE_OUTPUTS = ["baseline.jsonl", "baseline.csv", "pc_pvi.jsonl", "pc_pvi.csv",
                   "critical.jsonl", "critical.csv", "or_table.csv",
                   "manifest.json"]


@pytest.fixture(scope="module")
def fixture_run(tmp_path_factory):
    """A generated scenario analyzed once; reused by the read-only tests."""
    root = tmp_path_factory.mktemp("cli")
    gen_dir = root / "gen"
    assert main(["generate", "--packaged", "critical_replay",
                 "--out", str(gen_dir)]) == 0
    out_dir = root / "run"
    assert main(["analyze",
                 "--trajectories", str(gen_dir / "trajectories.csv"),
                 "--scene", str(gen_dir / "scene.yaml"),
                 "--output", str(out_dir)]) == 0
    return gen_dir, out_dir


class TestGenerate:
    def test_outputs_and_truth(self, fixture_run):
        gen_dir, _ = fixture_run
        assert (gen_dir / "trajectories.csv").read_text().startswith(CSV_HEADER)
        truth = yaml.safe_load((gen_dir / "truth.yaml").read_text())
        assert truth["pet"] == pytest.approx(-0.55, abs=0.01)
        assert truth["constellation"] == "vehicle_first"
        assert (gen_dir / "scene.yaml").exists()

    def test_spec_file(self, tmp_path):
        spec = tmp_path / "spec.yaml"
        spec.write_text("time_offset: 3.0\nveh_speed: 7.0\n")
        assert main(["generate", "--spec", str(spec),
                     "--out", str(tmp_path / "out")]) == 0
        truth = yaml.safe_load((tmp_path / "out" / "truth.yaml").read_text())
        assert truth["constellation"] == "pedestrian_first"

    def test_missing_source(self, tmp_path, capsys):
        assert main(["generate", "--out", str(tmp_path)]) == 1
        assert "--spec" in capsys.readouterr().err

    def test_bad_spec_reports_key(self, tmp_path, capsys):
        spec = tmp_path / "bad.yaml"
        spec.write_text("warp_factor: 9\n")
        assert main(["generate", "--spec", str(spec),
                     "--out", str(tmp_path / "o")]) == 1
        assert "warp_factor" in capsys.readouterr().err


class TestAnalyze:
    def test_output_files(self, fixture_run):
        _, out_dir = fixture_run
        for name in ANALYZE_OUTPUTS:
            assert (out_dir / name).exists(), name

    def test_counts_printed(self, fixture_run, capsys, tmp_path):
        gen_dir, _ = fixture_run
        assert main(["analyze",
                     "--trajectories", str(gen_dir / "trajectories.csv"),
                     "--scene", str(gen_dir / "scene.yaml"),
                     "--output", str(tmp_path / "r")]) == 0
        out = capsys.readouterr().out
        assert "crossing_pedestrians: 1" in out
        assert "critical_pvis: 1" in out

    def test_critical_record_contents(self, fixture_run):
        _, out_dir = fixture_run
        rows = [json.loads(line)
                for line in (out_dir / "critical.jsonl").read_text().splitlines()]
        assert len(rows) == 1
        rec = rows[0]
        assert rec["pet"] == pytest.approx(-0.55, abs=0.08)
        assert rec["motion_class"] == "non_ordinary"
        assert rec["residual_std"] > 0.04
        assert rec["tta_value"] is not None

    def test_manifest_traceability(self, fixture_run):
        gen_dir, out_dir = fixture_run
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["schema_version"] == 1
        assert len(manifest["inputs"]["trajectories"]["sha256"]) == 64
        assert manifest["parameters"]["threshold"] == 0.04
        assert manifest["counts"]["critical_pvis"] == 1

    def test_rerun_byte_identical(self, fixture_run, tmp_path):
        gen_dir, out_dir = fixture_run
        again = tmp_path / "again"
        assert main(["analyze",
                     "--trajectories", str(gen_dir / "trajectories.csv"),
                     "--scene", str(gen_dir / "scene.yaml"),
                     "--output", str(again)]) == 0
        for name in ANALYZE_OUTPUTS:
            if name == "manifest.json":
                continue  # carries the input paths
            assert filecmp.cmp(out_dir / name, again / name, shallow=False), name

    def test_config_file_with_flag_override(self, fixture_run, tmp_path):
        gen_dir, _ = fixture_run
        config = tmp_path / "run.yaml"
        config.write_text(yaml.safe_dump({
            "trajectories": str(gen_dir / "trajectories.csv"),
            "scene": str(gen_dir / "scene.yaml"),
            "output": str(tmp_path / "cfg_run"),
            "threshold": 0.9,
        }))
        assert main(["analyze", "--config", str(config),
                     "--threshold", "0.04"]) == 0
        manifest = json.loads((tmp_path / "cfg_run" / "manifest.json").read_text())
        assert manifest["parameters"]["threshold"] == 0.04

    def test_empty_trajectories_valid_empty_catalogs(self, fixture_run, tmp_path):
        gen_dir, _ = fixture_run
        empty = tmp_path / "empty.csv"
        empty.write_text(CSV_HEADER)
        out = tmp_path / "empty_run"
        assert main(["analyze", "--trajectories", str(empty),
                     "--scene", str(gen_dir / "scene.yaml"),
                     "--output", str(out)]) == 0
        assert (out / "baseline.jsonl").read_text() == ""
        assert len((out / "baseline.csv").read_text().splitlines()) == 1
        counts = json.loads((out / "manifest.json").read_text())["counts"]
        assert all(v == 0 for v in counts.values())

    def test_missing_scene_names_path(self, fixture_run, tmp_path, capsys):
        gen_dir, _ = fixture_run
        missing = tmp_path / "nope.yaml"
        assert main(["analyze",
                     "--trajectories", str(gen_dir / "trajectories.csv"),
                     "--scene", str(missing),
                     "--output", str(tmp_path / "x")]) == 1
        assert str(missing) in capsys.readouterr().err

    def test_missing_required_setting(self, capsys):
        assert main(["analyze", "--output", "somewhere"]) == 1
        assert "trajectories" in capsys.readouterr().err

    def test_malformed_input_cleans_outputs(self, fixture_run, tmp_path, capsys):
        gen_dir, _ = fixture_run
        bad = tmp_path / "bad.csv"
        bad.write_text(CSV_HEADER + "p1,pedestrian,0.0,oops,0,,,\n")
        out = tmp_path / "bad_run"
        assert main(["analyze", "--trajectories", str(bad),
                     "--scene", str(gen_dir / "scene.yaml"),
                     "--output", str(out)]) == 1
        assert "line 2" in capsys.readouterr().err
        assert not any(out.glob("*")) if out.exists() else True


class TestPlotdata:
    def test_pet_vs_std(self, fixture_run, tmp_path):
        _, out_dir = fixture_run
        assert main(["plotdata", str(out_dir), "--which", "pet_vs_std",
                     "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "pet_vs_std.csv").read_text().splitlines()
        assert lines[0].startswith("pedestrian_id,vehicle_id,pet")
        assert len(lines) == 2

    def test_speed_profiles_aligned_to_zero(self, fixture_run, tmp_path):
        _, out_dir = fixture_run
        assert main(["plotdata", str(out_dir), "--which", "speed_profiles",
                     "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "speed_profiles.csv").read_text().splitlines()
        first = lines[1].split(",")
        assert float(first[2]) == 0.0

    def test_timeline_single_record(self, fixture_run, tmp_path):
        _, out_dir = fixture_run
        assert main(["plotdata", str(out_dir), "--which", "timeline",
                     "--record", "ped:veh", "--out", str(tmp_path)]) == 0
        series = {line.split(",")[2]
                  for line in (tmp_path / "timeline.csv").read_text().splitlines()[1:]}
        assert series == {"ped_speed", "veh_speed", "tta"}

    def test_unknown_record(self, fixture_run, tmp_path, capsys):
        _, out_dir = fixture_run
        assert main(["plotdata", str(out_dir), "--which", "timeline",
                     "--record", "nobody:nothing", "--out", str(tmp_path)]) == 1
        assert "nobody:nothing" in capsys.readouterr().err

    def test_missing_run_dir(self, tmp_path, capsys):
        assert main(["plotdata", str(tmp_path / "void"),
                     "--which", "pet_vs_std"]) == 1
        assert "pc_pvi.jsonl" in capsys.readouterr().err


class TestValidateConfig:
    def test_good_scene(self, fixture_run, capsys):
        gen_dir, _ = fixture_run
        assert main(["validate-config", "--scene", str(gen_dir / "scene.yaml")]) == 0
        assert "scene ok" in capsys.readouterr().out

    def test_bad_scene(self, tmp_path, capsys):
        bad = tmp_path / "scene.yaml"
        bad.write_text("zones: []\nroi: [[0,0],[1,0],[1,1]]\nlanes: []\n"
                       "near_side_map: {}\nextra: 1\n")
        assert main(["validate-config", "--scene", str(bad)]) == 1
        assert "unknown" in capsys.readouterr().err

    def test_run_config(self, tmp_path, capsys):
        good = tmp_path / "run.yaml"
        good.write_text("threshold: auto\npc_window: 4.0\n")
        assert main(["validate-config", "--run", str(good)]) == 0
        bad = tmp_path / "bad.yaml"
        bad.write_text("pet_windowing: 4.0\n")
        assert main(["validate-config", "--run", str(bad)]) == 1

    def test_no_target(self, capsys):
        assert main(["validate-config"]) == 1


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
