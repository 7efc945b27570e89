#!/usr/bin/env python3
"""Scan sup_r t|(-Delta)^{a/2} h| / h over t and alpha on flat space and
print the spread per alpha at two resolutions."""

import argparse
import math

from fraclab.manifold import WarpingSpec, make_model
from fraclab.operator import assemble
from fraclab.weight import WeightParams, verify_frac_bound


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.5, 1.0, 1.5])
    ap.add_argument("--t", type=float, nargs="+", default=[0.25, 1.0, 4.0, 16.0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[512, 1024])
    ap.add_argument("--decay", type=float, default=1e-4,
                    help="value of h at r_max / 1.2 for the largest t")
    return ap.parse_args(argv)


def sized_model(n, alpha, nodes, t_values, decay):
    rho = math.sqrt(decay ** (-2.0 / (n + alpha)) - 1.0)
    r_max = 1.2 * rho * max(t_values) ** (1.0 / alpha)
    core = min(t_values) ** (1.0 / alpha) / 16.0
    return make_model(n, WarpingSpec("flat"), r_max, nodes, core)


def main(argv=None):
    args = parse_args(argv)
    print("alpha,nodes," + ",".join(f"t={t:g}" for t in args.t) + ",spread")
    for alpha in args.alphas:
        for nodes in args.nodes:
            m = sized_model(args.n, alpha, nodes, args.t, args.decay)
            rep = verify_frac_bound(assemble(m, "dirichlet-outer"), WeightParams(alpha, args.n, model=m), args.t)
            print(f"{alpha:g},{nodes}," + ",".join(f"{s:.6f}" for s in rep.sup_ratio) + f",{rep.spread:.6f}")


if __name__ == "__main__":
    main()
