"""Round-trip through the on-disk formats and the command line.

Writes a scenario to the interchange CSV schema, analyzes it with the CLI
entry point, and reads the resulting catalogs back.
"""

import json
import tempfile
from pathlib import Path

from pvimine.cli import main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    # 1. emit tracks + scene + analytic truth for a packaged scenario
    main(["generate", "--packaged", "critical_replay", "--out", str(tmp / "gen")])
    print((tmp / "gen" / "trajectories.csv").read_text().splitlines()[0])

    # 2. full analysis run; flags mirror the run-config YAML keys
    main(["analyze",
          "--trajectories", str(tmp / "gen" / "trajectories.csv"),
          "--scene", str(tmp / "gen" / "scene.yaml"),
          "--output", str(tmp / "run")])

    # 3. outputs: three catalogs (jsonl + csv), the OR table, a manifest
    print(sorted(p.name for p in (tmp / "run").iterdir()))
    manifest = json.loads((tmp / "run" / "manifest.json").read_text())
    print("input digest:", manifest["inputs"]["trajectories"]["sha256"][:16], "...")

    # 4. tidy per-plot CSVs for external plotting tools
    main(["plotdata", str(tmp / "run"), "--which", "timeline",
          "--record", "ped:veh", "--out", str(tmp / "plots")])
