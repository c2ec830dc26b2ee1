"""Band edges from shooting, plane waves and finite differences, side by side."""

import argparse

from hill import band_edges, load_potential
from hill.oracles import bloch_band_edges, fd_band_edges


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("potential")
    ap.add_argument("--n-bands", type=int, default=3)
    ap.add_argument("--mesh", type=int, default=256, help="finite-difference points per period")
    args = ap.parse_args()

    Q = load_potential(args.potential)
    T = Q.energy_scale
    ref = band_edges(Q, args.n_bands)
    bloch = bloch_band_edges(Q, args.n_bands)
    fd = fd_band_edges(Q, args.n_bands, M=args.mesh)
    print(f"{'band':>4} {'edge':>5} {'shooting':>18} {'bloch - ref':>12} {'fd - ref':>12}")
    for b, bl, f in zip(ref.bands, bloch, fd):
        for name, r, x, y in (("alpha", b.alpha, bl[0], f[0]), ("beta", b.beta, bl[1], f[1])):
            print(f"{b.index:>4} {name:>5} {r / T:>18.12f} {(x - r) / T:>12.2e} {(y - r) / T:>12.2e}")


if __name__ == "__main__":
    main()
