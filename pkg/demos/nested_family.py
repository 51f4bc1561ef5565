"""The whole nested family down to the empty complex.

Each stage deletes the most significant remaining sink and lets collapses
resume. Collapses never change the Euler characteristic, so every change in
chi(X) comes from the deleted simplices alone.

Run: python demos/nested_family.py
"""
import numpy as np

from wrapsurf import build, nested_family
from wrapsurf.sculpt import euler_characteristic

pts = np.random.default_rng(1).uniform(-1, 1, size=(40, 3))
cx = build(pts)
stages = nested_family(cx)

print(f"{len(stages)} stages for {len(pts)} points")
print(" i   simplices  chi(X)  deleted          rho^2   collapses")
for st in stages[:12] + [None] + stages[-3:]:
    if st is None:
        print(" ...")
        continue
    sink = st.deleted_sink
    name = str(sink.simplex) if sink else "-"
    rho = f"{sink.significance:8.4f}" if sink else "       -"
    print(f"{st.index:3d} {len(st.complex):10d} {st.chi_complex:7d}  {name:15s} {rho} {st.collapses:6d}")

ok = all(b.chi_complex == a.chi_complex - euler_characteristic(b.deleted)
         for a, b in zip(stages, stages[1:]))
print("chi changes only through deletions:", ok)
