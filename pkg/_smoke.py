"""Scratch sweep of the corpus tags."""
import time

from lmt import corpus as C
from lmt import encodings as E
from lmt.depthcheck import is_wf
from lmt.parser import parse_type
from lmt.printer import to_text
from lmt.reduction import ReductionError, check_cbv_syntax, run
from lmt.refs import check_simulation, run_nu, translate
from lmt.syntax import Bang, Para, struct_equiv
from lmt.typecheck import typeable, typecheck
from lmt.types import type_equal

t0 = time.time()
bad = []

print(f"corpus: {len(C.CORPUS)} entries, cbv={len(C.cbv_entries())}, "
      f"wf={len(C.wf_entries())}, typed={len(C.typed_entries())}, "
      f"nu={len(C.NU_CORPUS)}")

for e in C.CORPUS:
    try:
        p = e.program()
        er = e.erased()
    except Exception as ex:
        bad.append((e.name, "parse", repr(ex)))
        continue
    w = is_wf(er, e.region_depths())
    if w != e.wf:
        bad.append((e.name, "wf", f"expected {e.wf} got {w}"))
    try:
        check_cbv_syntax(er)
        cv = True
    except ReductionError:
        cv = False
    if cv != e.cbv_ok:
        bad.append((e.name, "cbv_ok", f"expected {e.cbv_ok} got {cv}"))
    ok = typeable(p, e.region_ctx(), expect=e.expected_type())
    if ok != e.typed:
        bad.append((e.name, "typed", f"expected {e.typed} got {ok}"))
        if not e.typed:
            pass
        else:
            try:
                d = typecheck(p, e.region_ctx())
                bad.append((e.name, "typed-as", to_text(p)[:60]))
            except Exception as ex:
                bad.append((e.name, "typed-err", str(ex)[:120]))
    if e.decode is not None:
        r = run(er, e.region_depths(), relation="full", strategy="shallow",
                fuel=10 ** 5)
        f = r.final
        if e.boxed and isinstance(f, (Bang, Para)):
            f = f.body
        got = E.decode_nat(f)
        if got != e.decode:
            bad.append((e.name, "decode", f"expected {e.decode} got {got}"))

print(f"-- tag sweep {time.time()-t0:.1f}s, {len(bad)} problems")
for b in bad:
    print("   ", b)

# nu corpus: type, run, translate, simulate
t1 = time.time()
nbad = []
for ne in C.NU_CORPUS:
    p = ne.program()
    ctx = ne.region_ctx()
    want = ne.expected_type()
    try:
        typecheck(p, ctx, expect=want)
    except Exception as ex:
        nbad.append((ne.name, "type", str(ex)[:150]))
        continue
    tr = translate(p, ne.region_types())
    try:
        typecheck(tr, ctx, expect=want)
    except Exception as ex:
        nbad.append((ne.name, "translated-type", str(ex)[:150]))
        continue
    r = run_nu(p)
    if not r.halted or r.blocked:
        nbad.append((ne.name, "run", f"halted={r.halted} blocked={r.blocked}"))
        continue
    rep = check_simulation(r.trace, ne.region_depths(), ne.region_types())
    if not rep.ok:
        nbad.append((ne.name, "sim", rep.reason[:150]))
        continue
    gets = [n for rule, n in rep.per_step if rule == "get"]
    sets = [n for rule, n in rep.per_step if rule == "set"]
    if not all(n >= 1 for n in gets) or not all(n == 1 for n in sets):
        nbad.append((ne.name, "counts", str(rep.per_step)))
print(f"-- nu sweep {time.time()-t1:.1f}s, {len(nbad)} problems")
for b in nbad:
    print("   ", b)

# doubling chain contrast at n=4
t2 = time.time()
from lmt.syntax import size as plain_size
f = C.doubling_chain_src(4)
from lmt.parser import parse_file
sf = parse_file(f)
r = run(sf.program, sf.region_depths, relation="full", strategy="deepfirst",
        fuel=10 ** 5)
print(f"-- deepfirst n=4: halted={r.halted} steps={len(r.trace.steps)} "
      f"final={plain_size(r.final)} (want >= {2 ** 3})")
r2 = run(sf.program, sf.region_depths, relation="full", strategy="shallow",
         fuel=10 ** 5)
from lmt.reduction import intermediate_programs
mx = max(plain_size(q) for q in intermediate_programs(r2.trace))
print(f"-- shallow n=4: halted={r2.halted} steps={len(r2.trace.steps)} "
      f"max={mx} final={plain_size(r2.final)} ({time.time()-t2:.1f}s)")
print(f"total {time.time()-t0:.1f}s")
