"""Print the closed-form bounds over a lambda0 ladder as CSV."""

import argparse

import numpy as np

from afmcf.estimates import report

COLUMNS = ("lambda0", "r0", "vol_bound_exact", "vol_bound_taylor", "vol_c1_bound",
           "hausdorff_bound_quasicircle", "hausdorff_bound_bc", "spectrum_lower_bound")

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--genus", type=int, default=2)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--max", type=float, default=0.95)
    ap.add_argument("--k3", type=float, default=1e-11)
    args = ap.parse_args()
    print(",".join(COLUMNS))
    for lam in np.linspace(0.0, args.max, args.n):
        d = report(float(lam), genus=args.genus, k3=args.k3).to_dict()
        print(",".join(format(d[c], ".10g") for c in COLUMNS))
