"""Fitted maximal-tail exponent of LFSM against alpha.

    python3 scripts/tail_exponent.py --alphas 1.3 1.5 1.7 --reps 10000
"""
import argparse
import sys

from imagedim.fields import FieldSpec
from imagedim.probes import probe_c1
from imagedim.sampling import Seed


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[1.3, 1.5, 1.7])
    ap.add_argument("--H", type=float, default=0.8)
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("alpha,beta_hat,fitted_constant,verdict")
    for a in args.alphas:
        rep = probe_c1(FieldSpec("lfsm", H=args.H, alpha=a, grid_n=256), args.H, reps=args.reps,
                       seed=Seed(args.seed))
        print(f"{a},{rep.fitted_exponent:.4f},{rep.fitted_constant:.4f},{rep.verdict}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
