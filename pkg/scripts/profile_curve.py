"""Profile curve s -> Dim_s of [0,1], a Cantor set or a two-phase set, as CSV.

    python3 scripts/profile_curve.py cantor --depth 12 > cantor_profile.csv
"""
import argparse
import sys

import numpy as np

from imagedim.config import SetSpec
from imagedim.harness import build_set
from imagedim.profiles import profile_curve
from imagedim.sampling import Seed


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("kind", choices=("interval", "cantor", "two_phase"))
    ap.add_argument("--depth", type=int, default=12)
    ap.add_argument("--points", type=int, default=32)
    ap.add_argument("--probes", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    spec = SetSpec(kind=args.kind, depth=args.depth)
    E, mu = build_set(spec, 2**args.depth)
    s = np.geomspace(0.05, E.ambient_dim + 1, args.points)
    sys.stdout.write(profile_curve((E, mu), s, n_probe=args.probes, seed=Seed(args.seed)).to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
