"""Evaluate the independent oracles once and store them as frozen test data.

    python3 scripts/freeze_oracles.py [--out tests/data/oracle_values.json]
"""

import argparse
import json
import warnings
import math
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

ALPHAS = [0.3, 0.5, 0.7, 0.9, 1.0]
YS = [-50.0, -20.0, -8.0, -4.0, -2.0, -0.5, 0.0, 0.7, 2.0, 5.0]
MAX_REACH = 150.0  # skip |y|^(1/alpha) beyond this: the series oracle gets slow
HATS = [0, 3, 9, 10]


def ml_table():
    rows = []
    for a in ALPHAS:
        params = {(1.0, 1.0), (a, 1.0), (a + 1.0, 2.0), (1.3, 1.0), (a + 1.0, 1.0), (a + 2.0, 1.0)}
        for b, g in sorted(params):
            for y in YS:
                if y and abs(y) ** (1.0 / a) > MAX_REACH:
                    continue
                rows.append([a, b, g, y, oracles.ml_series(a, b, g, y)])
    return rows


def free_evolution_table():
    """E_{r,1}(-pi^2 t^r) at 21 checkpoints, by Laplace inversion."""
    out = {}
    for r in (0.3, 0.7):
        rows = []
        for j in range(21):
            t = j / 20.0
            v = oracles.ml_talbot(r, -math.pi**2, t)
            if r == 0.7:
                ref = oracles.ml_series(r, 1.0, 1.0, -math.pi**2 * t**r)
                assert abs(v - ref) < 1e-13, (t, v, ref)
            rows.append([t, v])
        out[str(r)] = rows
    return out


def density_table():
    rows = []
    for r in (0.4, 0.5, 0.6):
        for x in (0.05, 0.2, 0.5, 1.0, 3.0, 10.0):
            rows.append([r, x, oracles.stable_density_series(r, x)])
    return rows


def gram_table():
    rows = []
    for a, b in ((0.0, 0.5), (1 / 3, 2 / 3), (0.25, 0.75), (1 / 3, 0.75)):
        for i in range(1, 26):
            for j in range(i, 26):
                rows.append([a, b, i, j, oracles.region_gram_quad(a, b, i, j)])
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "tests" / "data" / "oracle_values.json"))
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    t0 = time.time()
    r, T = 0.7, 0.9
    grid = [T * k / 10 for k in range(11)]
    data = {
        "ml": ml_table(),
        "ml_half_erfc": [[y, oracles.ml_half(y)] for y in (-4.0, -1.0, 0.5)],
        "density": density_table(),
        "region_gram": gram_table(),
        "zonal_coeffs": [
            [b1, b2, i, oracles.zonal_coeff_quad(b1, b2, i)]
            for b1, b2 in ((0.0, 1 / 3), (0.0, 0.5), (0.0, 1.0), (0.2, 0.7))
            for i in range(1, 21)
        ],
        "gramian_one_mode": {
            "r": r,
            "T": T,
            # zonal [0, 1/2] on omega = [0.25, 0.75]
            "value": oracles.gramian_one_mode(
                r, T, math.sqrt(2) / math.pi, 0.5 + 1 / math.pi
            ),
        },
        "free_evolution": free_evolution_table(),
        "hat_response": {
            "r": r,
            "T": T,
            "grid": grid,
            "modes": [1, 3, 7],
            "hats": HATS,
            "values": [
                [oracles.hat_response(r, -(i * math.pi) ** 2, T, grid, k) for k in HATS]
                for i in (1, 3, 7)
            ],
        },
    }
    Path(args.out).write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {args.out} in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
