"""Command line front door.

Exit codes: 0 on success, 1 when an analysis rejects the input
(ill-formed, ill-typed, bound violation, unparseable program), 2 on
usage or IO errors.  LMT_SEED provides the default scheduler seed.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Optional

from .bounds import unfold, verify_bound
from .corpus import doubling_chain_src
from .depthcheck import check_wf
from .encodings import decode_stores, threads_run_program, update_run_program
from .parser import ParseError, parse_file, parse_type
from .printer import to_text, type_text
from .reduction import (RELATIONS, STRATEGIES, canon_relation, canon_strategy,
                        intermediate_programs, read_trace, replay, run,
                        write_trace)
from .refs import run_nu, translate
from .reorder import is_shallow_first, reorder_shallow_first
from .syntax import LmtError, Nu, addresses, depth_of, size, struct_equiv
from .typecheck import typecheck
from .types import Type


def _default_seed() -> Optional[int]:
    s = os.environ.get("LMT_SEED")
    return int(s) if s else None


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as ex:
        print(f"error: {ex}", file=sys.stderr)
        raise SystemExit(2)


def _load(path: str):
    try:
        return parse_file(_read(path))
    except ParseError as ex:
        print(f"error: {ex}", file=sys.stderr)
        raise SystemExit(1)


def _region_ctx(f) -> dict[str, tuple[int, Type]]:
    return {r: (f.region_depths[r], ty) for r, ty in f.region_types.items()}


def cmd_parse(args) -> int:
    f = _load(args.file)
    for r, d in f.region_depths.items():
        ty = f.region_types.get(r)
        extra = f", type = {type_text(ty)}" if ty is not None else ""
        print(f"region #{r} : depth = {d}{extra}")
    print(to_text(f.program))
    if args.addresses:
        print()
        for addr, node in addresses(f.program):
            d = depth_of(f.program, addr, f.region_depths)
            s = to_text(node)
            if len(s) > 48:
                s = s[:45] + "..."
            print(f"{addr or '.':>12}  d={d}  {type(node).__name__}: {s}")
    return 0


def cmd_depthcheck(args) -> int:
    f = _load(args.file)
    try:
        deriv = check_wf(f.program, f.region_depths, args.delta)
    except LmtError as ex:
        print(f"rejected: {ex}", file=sys.stderr)
        return 1
    print(deriv.render())
    return 0


def cmd_typecheck(args) -> int:
    f = _load(args.file)
    expect = parse_type(args.type) if args.type else None
    try:
        deriv = typecheck(f.program, _region_ctx(f), delta=args.delta,
                          expect=expect)
    except LmtError as ex:
        print(f"rejected: {ex}", file=sys.stderr)
        return 1
    if args.derivation:
        print(deriv.render())
    print(type_text(deriv.ty))
    return 0


def cmd_eval(args) -> int:
    f = _load(args.file)
    if any(isinstance(n, Nu) for _, n in addresses(f.program)):
        print("error: the program binds locations; run translate-refs "
              "first or use `demo run`", file=sys.stderr)
        return 1
    try:
        res = run(f.program, f.region_depths, relation=args.relation,
                  strategy=args.strategy, seed=args.seed, fuel=args.fuel)
    except LmtError as ex:
        print(f"rejected: {ex}", file=sys.stderr)
        return 1
    print(f"steps {len(res.trace.steps)}")
    print(f"halted {'yes' if res.halted else 'no'}")
    print(to_text(res.final))
    if args.trace:
        write_trace(res.trace, args.trace)
        print(f"trace written to {args.trace}")
    return 0


def cmd_reorder(args) -> int:
    try:
        trace = read_trace(args.trace)
        out = reorder_shallow_first(trace)
    except (OSError, ValueError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    except LmtError as ex:
        print(f"rejected: {ex}", file=sys.stderr)
        return 1
    same = struct_equiv(replay(trace), replay(out))
    print(f"steps {len(out.steps)}")
    print(f"shallow-first {'yes' if is_shallow_first(out) else 'no'}")
    print(f"same-final {'yes' if same else 'no'}")
    if args.out:
        write_trace(out, args.out)
        print(f"trace written to {args.out}")
    return 0


def cmd_bound(args) -> int:
    f = _load(args.file)
    strategy = canon_strategy(args.strategy)
    relation = "cbv" if strategy == "cbv" else "outer_bang"
    try:
        rep = verify_bound(f.program, f.region_depths, strategy=strategy,
                           relation=relation, seed=args.seed,
                           raise_on_fail=False)
    except LmtError as ex:
        print(f"rejected: {ex}", file=sys.stderr)
        return 1
    print(rep.render())
    return 0 if rep.passed else 1


def cmd_unfold(args) -> int:
    f = _load(args.file)
    try:
        print(to_text(unfold(f.program, args.depth, f.region_depths)))
    except LmtError as ex:
        print(f"rejected: {ex}", file=sys.stderr)
        return 1
    return 0


def cmd_translate_refs(args) -> int:
    f = _load(args.file)
    try:
        body = translate(f.program, f.region_types)
    except LmtError as ex:
        print(f"rejected: {ex}", file=sys.stderr)
        return 1
    for r, d in f.region_depths.items():
        ty = f.region_types.get(r)
        extra = f", type = {type_text(ty)}" if ty is not None else ""
        print(f"region #{r} : depth = {d}{extra}")
    print(to_text(body))
    return 0


def _demo_zprime(args) -> int:
    from .parser import parse_file as pf
    strategy = canon_strategy(args.strategy or "deepfirst")
    hi = args.n or 8
    print(f"doubling chain under the full relation, {strategy} scheduling")
    print(f"{'n':>3}  {'steps':>6}  {'final-size':>10}  {'2^(n-1)':>8}  "
          f"{'max-size':>9}")
    for n in range(1, hi + 1):
        sf = pf(doubling_chain_src(n))
        res = run(sf.program, sf.region_depths, relation="full",
                  strategy=strategy, seed=args.seed, fuel=10 ** 6)
        mx = max(size(q) for q in intermediate_programs(res.trace))
        print(f"{n:>3}  {len(res.trace.steps):>6}  {size(res.final):>10}  "
              f"{2 ** (n - 1):>8}  {mx:>9}")
    return 0


def _demo_run(args) -> int:
    from .parser import parse_program
    p = parse_program(update_run_program(0, 1, 2))
    t0 = time.time()
    r = run_nu(p, under_binders=True, fuel=args.fuel)
    stores = decode_stores(r.final)
    print(f"steps {len(r.trace.steps)}  ({time.time() - t0:.2f}s)")
    print(f"halted {'yes' if r.halted else 'no'}")
    print("stores " + " ".join(f"{k}={v}" for k, v in sorted(stores.items())))
    return 0 if r.halted and stores == {"x": 2, "y": 3, "z": 4} else 1


def _demo_run_threads(args) -> int:
    from .parser import parse_program
    seeds = range(args.n or 1)
    base = args.seed or 0
    ok = True
    for k in seeds:
        p = parse_program(threads_run_program(6, 7, 8))
        t0 = time.time()
        r = run_nu(p, strategy="update", seed=base + k, under_binders=True,
                   fuel=args.fuel)
        stores = decode_stores(r.final)
        good = r.halted and stores == {"x": 12, "y": 13, "z": 14}
        ok = ok and good
        print(f"seed {base + k}: steps {len(r.trace.steps)} "
              f"stores " + " ".join(f"{k2}={v}"
                                    for k2, v in sorted(stores.items()))
              + f"  ({time.time() - t0:.2f}s)")
    return 0 if ok else 1


def cmd_demo(args) -> int:
    if args.which == "zprime":
        return _demo_zprime(args)
    if args.which == "run":
        return _demo_run(args)
    return _demo_run_threads(args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lmt",
        description="interpreter and static analysis for a depth-"
                    "stratified calculus with regions and threads")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("parse", help="echo the parsed program")
    p.add_argument("file")
    p.add_argument("--addresses", action="store_true",
                   help="list every occurrence with its depth")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("depthcheck", help="decide well-formedness")
    p.add_argument("file")
    p.add_argument("--delta", type=int, default=None,
                   help="judgement depth (default: inferred)")
    p.set_defaults(fn=cmd_depthcheck)

    p = sub.add_parser("typecheck", help="synthesize a type")
    p.add_argument("file")
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--type", default="", help="expected type")
    p.add_argument("--derivation", action="store_true")
    p.set_defaults(fn=cmd_typecheck)

    p = sub.add_parser("eval", help="run a region program")
    p.add_argument("file")
    p.add_argument("--relation", default="full",
                   choices=["full", "outer", "outer_bang", "cbv"])
    p.add_argument("--strategy", default="cbv", choices=list(STRATEGIES))
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--fuel", type=int, default=10 ** 6)
    p.add_argument("--trace", default="", help="write the trace here")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("reorder", help="reorder a trace shallow-first")
    p.add_argument("trace")
    p.add_argument("--out", default="", help="write the reordered trace here")
    p.set_defaults(fn=cmd_reorder)

    p = sub.add_parser("bound", help="certify the size/step bound")
    p.add_argument("file")
    p.add_argument("--strategy", default="shallow",
                   choices=["shallow", "cbv", "random"])
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("unfold", help="print the unfolding at a depth")
    p.add_argument("file")
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(fn=cmd_unfold)

    p = sub.add_parser("translate-refs",
                       help="render a location program down to regions")
    p.add_argument("file")
    p.set_defaults(fn=cmd_translate_refs)

    p = sub.add_parser("demo", help="built-in showcases")
    p.add_argument("which", choices=["zprime", "run", "run-threads"])
    p.add_argument("-n", type=int, default=None,
                   help="chain length (zprime) or seed count (run-threads)")
    p.add_argument("--strategy", default=None)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--fuel", type=int, default=10 ** 6)
    p.set_defaults(fn=cmd_demo)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as ex:
        # argparse exits 2 on usage errors already
        return int(ex.code or 0)
    try:
        return args.fn(args)
    except SystemExit as ex:
        return int(ex.code or 0)
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
