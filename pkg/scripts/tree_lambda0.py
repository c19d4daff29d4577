"""Bottom of the spectrum of the equilateral regular tree: exhaustion against the closed form."""
import argparse

from graphpotential.spectral import radial_lambda0_exhaustion, tree_bottom_of_spectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--h", type=float, default=0.25)
    ap.add_argument("--radii", type=float, nargs="+", default=[10, 20, 40, 80, 160, 320])
    args = ap.parse_args()
    exact = tree_bottom_of_spectrum(args.degree)
    rep = radial_lambda0_exhaustion(args.degree, 1.0, args.radii, args.h)
    print(f"{'R':>6} {'lambda_1(B_R)':>16} {'rel. error':>12}")
    for R, v in zip(rep.radii, rep.values):
        print(f"{R:6g} {v:16.10f} {(v - exact) / exact:12.3e}")
    print(f"closed form {exact:.10f}; Aitken {rep.aitken:.10f}; last decrement {rep.decrement:.3e}")


if __name__ == "__main__":
    main()
