"""Green decay along a geodesic ray in the Cayley graph of Z/2 * Z/3 over the lambda grid.

Prints G(x, y_n) and the far/near ratio G(d=10)/G(d=2) per lambda.  Near the
bottom of the spectrum the ratio exceeds 0.1 on this graph, so the output is
informational rather than a pass/fail check.
"""
import argparse

from graphpotential.ancona import estimate_lambda0, green_decay_profile
from graphpotential.graph import geodesic_ray
from graphpotential.report import graph_from_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=16)
    ap.add_argument("--h", type=float, default=0.25)
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75, 0.9, 0.99])
    ap.add_argument("--out")
    args = ap.parse_args()
    spec = f"cayley_ball:group=Z2*Z3,radius={args.radius}"
    lam0 = estimate_lambda0(spec, args.h).estimate
    g = graph_from_spec(spec)
    ray = geodesic_ray(g, 0, args.radius - 4)
    rep = green_decay_profile(spec, [f * lam0 for f in args.fractions], 0, ray, args.h, float(args.radius))
    print(f"lambda0 estimate {lam0:.6f}")
    for a in rep.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'}  {a.name}  {a.detail}")
    if args.out:
        rep.save(args.out, dat=("distance", ["G"], "lam"))


if __name__ == "__main__":
    main()
