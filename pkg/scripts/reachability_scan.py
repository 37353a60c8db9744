"""Controllability margin smin/smax of Lambda against the truncation N.

Shows how fast the regional Gramian's spectrum spreads with N for a zonal
and a pointwise actuator.

    python3 scripts/reachability_scan.py [--r 0.7] [--nmax 15]
"""

import argparse

from fraccontrol import FracParams, Pointwise, Region, Zonal, gramian


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=float, default=0.7)
    ap.add_argument("--nmax", type=int, default=15)
    args = ap.parse_args()
    p = FracParams(r=args.r)
    cases = {
        "zonal[0,1/2] on [1/4,3/4]": (Zonal(0.0, 0.5), Region(0.25, 0.75)),
        "point 1/2 on [1/3,3/4]": (Pointwise(0.5), Region(1 / 3, 0.75)),
        "point 1/2 on [0,1]": (Pointwise(0.5), Region(0.0, 1.0)),
    }
    print("N  " + "  ".join(f"{k:>26s}" for k in cases))
    for n in range(1, args.nmax + 1):
        ratios = []
        for act, omega in cases.values():
            rep = gramian(p, act, omega, n)
            ratios.append(rep.smin / rep.smax if rep.smax else 0.0)
        print(f"{n:<2d} " + "  ".join(f"{x:26.3e}" for x in ratios))


if __name__ == "__main__":
    main()
