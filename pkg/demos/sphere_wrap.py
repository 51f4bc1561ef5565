"""Wrap a jittered sphere sample and inspect the surface.

Carving from the outside stops at triangles whose neighbouring circumcenter
lies inside, so a dense enough sample of a sphere wraps to a closed genus-0
surface while the remaining complex stays a ball.

Run: python demos/sphere_wrap.py [out.stl]
"""
import sys
import time

from wrapsurf import build, sample_sphere, wrap, write_surface
from wrapsurf.meshio import compact

pts = sample_sphere(200, jitter=0.02, seed=0)
t0 = time.perf_counter()
cx = build(pts)
stage = wrap(cx)
dt = time.perf_counter() - t0

print(f"{len(pts)} points -> {len(cx.tets)} Delaunay tetrahedra")
print(f"X0 keeps {stage.counts} (chi = {stage.chi_complex}); {stage.collapses} collapses")
for k, v in stage.surface.report().items():
    print(f"  {k:18s} {v}")
print(f"{dt:.2f} s")

if len(sys.argv) > 1:
    V, T = compact(cx.points, stage.surface.triangles)
    n = write_surface(sys.argv[1], V, T)
    print(f"wrote {sys.argv[1]} ({n} bytes)")
