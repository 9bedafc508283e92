"""Run every verification case and print one line per case.

    python3 scripts/run_suite.py [--out runs] [--seed N]
"""
import argparse
import sys
import time

from imagedim.harness import SUITE, verify_theorem


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="write per-case reports here")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()
    ok = True
    for cid in SUITE:
        t0 = time.monotonic()
        v = verify_theorem(cid, seed=args.seed, out=args.out, write=bool(args.out))
        print(f"{v.line()}  ({time.monotonic() - t0:.1f}s)", flush=True)
        ok &= v.passed and v.complete
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
