"""Exact predicates and the symbolic tie-break.

The unit corner tetrahedron and the point (1, 1, 1) lie on one sphere, so the
plain in-sphere test returns ZERO. The perturbed test moves every point a
symbolic amount along the moment curve and always commits to a side; the
answer depends only on the point ids.

Run: python demos/predicates_and_perturbation.py
"""
import itertools

from wrapsurf import build, kernel
from wrapsurf.kernel import Sign

tet = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
q = (1, 1, 1)

print("orient3d(unit tet)           ", kernel.orient3d(*tet).name)
print("in_sphere(centroid)          ", kernel.in_sphere(*tet, (0.25, 0.25, 0.25)).name)
print("in_sphere((1, 1, 1))         ", kernel.in_sphere(*tet, q).name)
print("perturbed, ids 0..4          ", kernel.perturbed_in_sphere(*tet, q, ids=(0, 1, 2, 3, 4)).name)
print("perturbed, ids 4,3,2,1,0     ", kernel.perturbed_in_sphere(*tet, q, ids=(4, 3, 2, 1, 0)).name)

# a float filter alone would round this to a tie
eps = 2.0 ** -40
print("in_sphere((1, 1, 1 - 2^-40)) ", kernel.in_sphere(*tet, (1, 1, 1 - eps)).name)

cube = list(itertools.product((0, 1), repeat=3))
subsets = [[cube[i] for i in c] for c in itertools.combinations(range(8), 5)]
proper = [s for s in subsets if kernel.orient3d(*s[:4]) is not Sign.ZERO]
ties = sum(kernel.in_sphere(*s) is Sign.ZERO for s in proper)
print(f"\ncube corners: {ties} of {len(proper)} subsets with a proper tetrahedron are cospherical")
cx = build(cube)
flat = sum(cx.is_degenerate(t) for t in cx.tets)
print(f"its Delaunay complex: {len(cx.tets) - flat} proper tetrahedra "
      f"plus {flat} flat ones on the cube faces, chi = {cx.euler_characteristic()}")
