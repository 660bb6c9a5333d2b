#!/usr/bin/env python3
"""Sizes of the doubling chain under deep-first vs shallow-first
scheduling of the full relation, side by side."""
import argparse
import sys
import time

sys.path.insert(0, "src")

from lmt.corpus import doubling_chain_src
from lmt.parser import parse_file
from lmt.reduction import intermediate_programs, run
from lmt.syntax import size


def row(n: int, strategy: str) -> tuple[int, int, int]:
    sf = parse_file(doubling_chain_src(n))
    res = run(sf.program, sf.region_depths, relation="full",
              strategy=strategy, fuel=10 ** 6)
    mx = max(size(q) for q in intermediate_programs(res.trace))
    return len(res.trace.steps), size(res.final), mx


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=10, help="largest chain")
    args = ap.parse_args()
    t0 = time.time()
    print(f"{'n':>3}  {'2^(n-1)':>8}  {'deep final':>10}  {'deep max':>9}  "
          f"{'shallow final':>13}  {'shallow max':>11}")
    for n in range(1, args.n + 1):
        _, fd, md = row(n, "deepfirst")
        _, fs, ms = row(n, "shallow")
        print(f"{n:>3}  {2 ** (n - 1):>8}  {fd:>10}  {md:>9}  "
              f"{fs:>13}  {ms:>11}")
    print(f"({time.time() - t0:.2f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
