"""Regenerate the committed golden files from a fresh verified run.

Usage: python tools/make_golden.py
"""

import json
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from actcomb.report import dumps_report, run_scenario  # noqa: E402
from actcomb.verify import verify_report  # noqa: E402


def main() -> int:
    scenario = json.loads((ROOT / "scenarios" / "affine-bsg-demo.json").read_text())
    t0 = time.monotonic()
    report = run_scenario(scenario)
    runtime = time.monotonic() - t0
    verify_report(report, integrity=False)
    trace = report["results"][0]["result"]
    golden = {
        "scenario": "affine-bsg-demo",
        "tripling_ratio": trace["tripling"]["tripling_ratio"],
        "extracted_size": trace["tripling"]["set_size"],
        "level_sizes": [[lv["size"], lv["next_size"]] for lv in trace["levels"]],
        "j_star": trace["j_star"],
        "sym_size": trace["sym_size_or_bound"],
        "cover_Z": len(trace["part3_cover"]["Z"]),
        "cover_Y": len(trace["part3_cover"]["Y_covered"]),
    }
    out = ROOT / "tests" / "golden" / "affine_bsg_oracle.json"
    out.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")
    (ROOT / "tests" / "golden" / "affine-bsg-demo.report.json").write_text(dumps_report(report))
    print(f"wrote {out} (tripling {golden['tripling_ratio']}, {runtime:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
