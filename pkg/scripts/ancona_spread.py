"""Spread of the ratio G(x,z) / (G(x,y) G(y,z)) over colinear triples at two distance scales."""
import argparse

from graphpotential.ancona import ancona_sweep, colinear_triples, estimate_lambda0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", default="cayley_ball:group=Z2*Z3,radius=12")
    ap.add_argument("--h", type=float, default=0.5)
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.0, 0.5, 0.9])
    ap.add_argument("--scales", type=float, nargs=2, default=[6.0, 8.0])
    ap.add_argument("--out")
    args = ap.parse_args()
    lam0 = estimate_lambda0(args.graph).estimate
    splits = [(a, b) for a in range(1, 8) for b in range(1, 8) if 4 <= a + b <= args.scales[1]]
    triples = colinear_triples(args.graph, [0, 1, 2, 3], splits)
    rep = ancona_sweep(args.graph, args.h, [f * lam0 for f in args.fractions], triples,
                       R=float(args.graph.rsplit("=", 1)[1]), spread_scales=args.scales)
    for a in rep.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'}  {a.name}  {a.detail}")
    if args.out:
        rep.save(args.out)


if __name__ == "__main__":
    main()
