#!/usr/bin/env python3
"""Run the minorant-transfer pipeline on the desk presets and write reports.

Usage:
    python scripts/run_desk_pipeline.py [--out OUT_DIR]

Equivalent to `cmlab pipeline --preset desk-small` / `desk-medium`, kept as a
script so a full desk run is one command with both presets side by side.
"""

import argparse
import sys
import time
from pathlib import Path

from cmlab.goldbach import PRESETS, desk_pipeline_inputs, run_pipeline


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="cmlab-out", help="report directory")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    exit_code = 0
    for name in ("desk-small", "desk-medium"):
        config = PRESETS[name]()
        t0 = time.time()
        report = run_pipeline(config, *desk_pipeline_inputs(config))
        elapsed = time.time() - t0
        with open(out / f"pipeline-{name}.csv", "w") as fh:
            report.write_csv(fh)
        (out / f"pipeline-{name}.json").write_text(report.to_json() + "\n")
        print(
            f"{name}: X={config.x} Y={config.y} H={config.h} Q={config.big_q} "
            f"({elapsed:.1f}s)\n"
            f"  final failures {report.final_failures}/{report.even_count} even n, "
            f"step2 exceptions {report.exceptions_step2}, "
            f"step4 exceptions {report.exceptions_step4}, "
            f"positivity violations {report.step_positivity_violations}"
        )
        if report.final_failures or report.step_positivity_violations or report.minorization_violations:
            exit_code = 1
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
