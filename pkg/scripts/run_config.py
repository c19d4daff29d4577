"""Run a TOML configuration and print one line per assertion.

    python scripts/run_config.py configs/tree_ancona.toml --out out/tree
"""
import argparse
import sys

from graphpotential.cli import run
from graphpotential.config import RunConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    status, summary = run(RunConfig.load(args.config), args.out, args.threads)
    for a in summary["assertions"]:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['cell']}  {a['name']}  {a['detail']}")
    print(f"lambda0 = {summary['lambda0']}, exit status {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())
