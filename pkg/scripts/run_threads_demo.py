#!/usr/bin/env python3
"""Three writer threads bumping three shared counters.

With update-grain scheduling every seed converges on +6 per counter.
The --races flag switches to plain random interleaving, where whole
updates are routinely lost."""
import argparse
import sys
import time

sys.path.insert(0, "src")

from lmt.encodings import decode_stores, threads_run_program
from lmt.parser import parse_program
from lmt.refs import run_nu


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=5, help="seed count")
    ap.add_argument("--races", action="store_true",
                    help="drop the atomicity guard")
    ap.add_argument("--start", type=int, nargs=3, default=(6, 7, 8),
                    metavar=("M", "N", "P"))
    args = ap.parse_args()
    strategy = "random" if args.races else "update"
    m, n, p = args.start
    for seed in range(args.n):
        t0 = time.time()
        prog = parse_program(threads_run_program(m, n, p))
        r = run_nu(prog, strategy=strategy, seed=seed, under_binders=True)
        stores = decode_stores(r.final)
        print(f"seed {seed}: "
              + " ".join(f"{k}={v}" for k, v in sorted(stores.items()))
              + f"  ({len(r.trace.steps)} steps, {time.time() - t0:.2f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
