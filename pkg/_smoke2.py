import time
from lmt import corpus as C
from lmt.parser import parse_file
from lmt.reduction import run, intermediate_programs
from lmt.syntax import size

t0 = time.time()
c4 = None
for n in range(4, 11):
    sf = parse_file(C.doubling_chain_src(n))
    r = run(sf.program, sf.region_depths, relation="full",
            strategy="deepfirst", fuel=10 ** 6)
    fdeep = size(r.final)
    r2 = run(sf.program, sf.region_depths, relation="full",
             strategy="shallow", fuel=10 ** 6)
    mx = max(size(q) for q in intermediate_programs(r2.trace))
    if n == 4:
        c4 = mx / 4
    print(f"n={n}: deep final={fdeep} (>= {2**(n-1)}: {fdeep >= 2**(n-1)}), "
          f"deep steps={len(r.trace.steps)}, shallow max={mx} "
          f"(<= {c4*n:.0f}: {mx <= c4*n}), {time.time()-t0:.2f}s")
print(f"total {time.time()-t0:.2f}s")
