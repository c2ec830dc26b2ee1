"""Print contour and formula residues of h_+ and h_- at the first Dirichlet eigenvalues."""

import argparse

from hill import dirichlet_eigenvalues, load_potential
from hill.herglotz import hill_residues


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("potentials", nargs="+")
    ap.add_argument("--n", type=int, default=4)
    args = ap.parse_args()
    head = f"{'n':>2} {'h':>2} {'mu':>14} {'contour':>14} {'formula':>14} {'rel diff':>9}  kind"
    for path in args.potentials:
        Q = load_potential(path)
        print(f"\n{path}\n{head}")
        for r in hill_residues(Q, dirichlet_eigenvalues(Q, args.n)):
            kind = "pole" if r["pole"] else "removable"
            flag = "" if r["consistent"] else "  INCONSISTENT"
            print(f"{r['index']:>2} {r['sign']:>2} {r['mu']:>14.8f} {r['residue_contour']:>14.6e} "
                  f"{r['residue_formula']:>14.6e} {r['rel_diff']:>9.1e}  {kind}{flag}")


if __name__ == "__main__":
    main()
