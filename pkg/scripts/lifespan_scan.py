#!/usr/bin/env python3
"""Compare the closed-form lifespan bound with the comparison-ODE blow-up
time over a grid of exponents and shifts."""

import argparse

from fraclab.errors import SupercriticalError
from fraclab.solver import lifespan_upper_bound, ode_blowup_oracle


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--phi0", type=float, default=1.0)
    ap.add_argument("--p", type=float, nargs="+", default=[1.01, 1.05, 1.1, 1.25, 1.4])
    ap.add_argument("--N", type=float, nargs="+", default=[1.0, 4.0, 16.0])
    return ap.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    print("p,N,beta,t_star,t_ode,ratio")
    for p in args.p:
        for N in args.N:
            try:
                est = lifespan_upper_bound(N, args.phi0, p, args.alpha, args.n)
            except SupercriticalError as exc:
                print(f"{p:g},{N:g},skipped: {exc}")
                continue
            C = (1.0 - est.beta) / (p - 1.0)
            t_ode = ode_blowup_oracle(N, args.phi0, p, args.alpha, args.n, C)
            print(f"{p:g},{N:g},{est.beta:.4f},{est.t_star:.8g},{t_ode:.8g},{t_ode / est.t_star:.10f}")


if __name__ == "__main__":
    main()
