"""Run the shipped presets through the CLI and print a short summary.

    python3 scripts/run_examples.py [--out runs]
"""

import argparse
import json
import sys
from pathlib import Path

from fraccontrol.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()
    status = 0
    for cfg in sorted((ROOT / "configs").glob("*.json")):
        for command in ("gramian", "hum", "verify"):
            out = Path(args.out) / cfg.stem / command
            code = cli_main([command, "--config", str(cfg), "--out", str(out)])
            line = f"{cfg.stem:22s} {command:8s} exit={code}"
            summary = {"hum": "summary.json", "verify": "verify.json", "gramian": "gramian.json"}[command]
            if (out / summary).exists():
                rec = json.loads((out / summary).read_text())
                keys = ("residual", "energy", "smin", "smax", "min_energy_gap")
                line += "  " + "  ".join(f"{k}={rec[k]:.3g}" for k in keys if k in rec)
            print(line)
            status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
