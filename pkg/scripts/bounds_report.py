#!/usr/bin/env python3
"""Certify the step/size bound over the well-formed corpus."""
import argparse
import sys
import time

sys.path.insert(0, "src")

from lmt.bounds import verify_bound
from lmt.corpus import wf_entries


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--strategy", default="shallow",
                    choices=["shallow", "cbv", "random"])
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()
    relation = "cbv" if args.strategy == "cbv" else "outer_bang"
    t0 = time.time()
    worst = 0
    for e in wf_entries():
        if args.strategy == "cbv" and not e.cbv_ok:
            continue
        rep = verify_bound(e.erased(), e.region_depths(),
                           strategy=args.strategy, relation=relation,
                           seed=args.seed, raise_on_fail=False)
        used = max(rep.steps, rep.max_size) / max(rep.bound, 1)
        worst = max(worst, used)
        flag = "" if rep.passed else "  <-- FAIL"
        print(f"{e.name:>22}: steps {rep.steps:>5}  max {rep.max_size:>6}  "
              f"bound {rep.bound:>12}  used {used:6.1%}{flag}")
    print(f"worst utilisation {worst:.1%}  ({time.time() - t0:.2f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
