"""Write plot-ready columns for a band diagram: D(lambda) on a grid plus the band edges.

    python scripts/band_diagram.py data/potentials/kp.json --lambda-max 120 --out kp_bands
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from hill import band_edges, load_potential
from hill.discriminant import discriminant_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("potential")
    ap.add_argument("--lambda-min", type=float, default=-10.0)
    ap.add_argument("--lambda-max", type=float, default=120.0)
    ap.add_argument("--grid", type=int, default=2000)
    ap.add_argument("--n-bands", type=int, default=4)
    ap.add_argument("--out", default="band_diagram")
    args = ap.parse_args()

    Q = load_potential(args.potential)
    T = Q.energy_scale
    data = discriminant_grid(Q, args.lambda_min * T, args.lambda_max * T, args.grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "discriminant.csv", np.column_stack([data[:, 0] / T, data[:, 1]]),
               delimiter=",", header="lambda,delta", comments="")

    bs = band_edges(Q, args.n_bands).scaled(T)
    with open(out / "bands.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "alpha", "beta"])
        for b in bs.bands:
            w.writerow([b.index, repr(b.alpha), repr(b.beta)])
    for msg in bs.warnings:
        print("warning:", msg)
    print(f"wrote {out}/discriminant.csv and {out}/bands.csv")


if __name__ == "__main__":
    main()
