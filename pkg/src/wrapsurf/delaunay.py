"""Delaunay complex of a point set, with the exterior pseudo-cell.

Construction is incremental (Bowyer-Watson): each point is located by a
remembering stochastic walk, its conflict region is carved out and the cavity
is re-filled by coning its boundary to the new point. The hull is handled
with ghost tetrahedra that share a virtual vertex at infinity; they exist
only during construction. In the finished complex the exterior is the
sentinel ``OMEGA``, a coface of exactly the hull triangles.

All predicates run under the symbolic perturbation of :mod:`wrapsurf.kernel`,
so cospherical and coplanar inputs still yield one well-defined
triangulation: the Delaunay triangulation of the perturbed points.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernel
from .errors import DegenerateInput, DuplicatePoint, TooFewPoints, UnknownSimplex
from .kernel import Sign

__all__ = [
    "OMEGA",
    "ExteriorCell",
    "DelaunayComplex",
    "DelaunayReport",
    "build",
    "brute_force_delaunay",
    "verify_delaunay",
    "canonical_key",
    "dump_simplices",
    "local_violations",
]

_GHOST = -1


class ExteriorCell:
    """The space outside the convex hull; a coface of every hull triangle."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OMEGA"

    def __reduce__(self):
        return (ExteriorCell, ())


OMEGA = ExteriorCell()


def canonical_key(s):
    """Sort key: lower dimension first, then lexicographic vertex tuple; OMEGA last."""
    if s is OMEGA:
        return (5, ())
    return (len(s), s)


class _Predicates:
    """Index-based perturbed predicates over a fixed point set."""

    def __init__(self, coords: list[tuple[float, float, float]]):
        self.f = coords
        self.i = kernel.scaled_integer_coords(coords)

    def orient(self, q) -> int:
        # orient3d sign of the (perturbed) points q[0..3]
        f = self.f
        s = kernel._orient_float(f[q[0]], f[q[1]], f[q[2]], f[q[3]])
        if s is None:
            pts = [self.i[k] for k in q]
            s = kernel._sgn(kernel._orient_det(*pts))
            if s == 0:
                s = kernel._orient_det(*kernel._perturbed(pts, q)).sign()
        return -s

    def insphere(self, q, p) -> int:
        f = self.f
        s = kernel._insphere_float(f[q[0]], f[q[1]], f[q[2]], f[q[3]], f[p])
        if s is None:
            ids = (q[0], q[1], q[2], q[3], p)
            pts = [self.i[k] for k in ids]
            s = kernel._sgn(kernel._insphere_det(*pts))
            if s == 0:
                s = kernel._insphere_det(*kernel._perturbed(pts, ids)).sign()
        return -s


def _validate(points) -> list[tuple[float, float, float]]:
    coords = []
    for k, p in enumerate(points):
        c = tuple(float(v) for v in p[:3])
        if not all(math.isfinite(v) for v in c):
            raise DegenerateInput(f"point {k} has a non-finite coordinate")
        coords.append(c)
    if len(coords) < 4:
        raise TooFewPoints(f"need at least 4 points, got {len(coords)}")
    seen: dict[tuple, int] = {}
    for k, c in enumerate(coords):
        if c in seen:
            raise DuplicatePoint(seen[c], k)
        seen[c] = k
    a = coords[0]
    # exact test for a full-dimensional input
    b = coords[1]
    c_idx = None
    for k in range(2, len(coords)):
        u = kernel.scaled_integer_coords([a, b, coords[k]])
        e1 = [u[1][j] - u[0][j] for j in range(3)]
        e2 = [u[2][j] - u[0][j] for j in range(3)]
        cross = (e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                 e1[0] * e2[1] - e1[1] * e2[0])
        if any(cross):
            c_idx = k
            break
    if c_idx is None:
        raise DegenerateInput("all points are collinear")
    c = coords[c_idx]
    if all(kernel.orient3d(a, b, c, d) == Sign.ZERO for d in coords):
        raise DegenerateInput("all points are coplanar")
    return coords


def _triangulate(coords, seed: int = 0x5EED) -> tuple[list[tuple], list[tuple]]:
    """Return (positively oriented tets, hull facets) as vertex-id tuples."""
    pred = _Predicates(coords)
    rng = random.Random(seed)
    first = [0, 1, 2, 3]
    if pred.orient(first) < 0:
        first[0], first[1] = first[1], first[0]
    verts: list[list[int]] = [first]
    nbrs: list[list[int]] = [[0, 0, 0, 0]]
    for k in range(4):
        g = list(first)
        g[k] = _GHOST
        # an outside point in the ghost slot sits opposite first[k]
        i, j = [m for m in range(4) if m != k][:2]
        g[i], g[j] = g[j], g[i]
        verts.append(g)
        nbrs.append([-1] * 4)
        nbrs[-1][k] = 0
        nbrs[0][k] = len(verts) - 1
    # ghost-ghost adjacency
    _link_new(verts, nbrs, range(1, 5), {})
    dead = [False] * len(verts)
    last = 0

    def conflict(t, p):
        vs = verts[t]
        if _GHOST in vs:
            q = list(vs)
            q[vs.index(_GHOST)] = p
            return pred.orient(q) > 0
        return pred.insphere(vs, p) > 0

    order = [0, 1, 2, 3]
    for p in range(4, len(coords)):
        # remembering stochastic walk
        t, prev = last, -1
        while True:
            vs = verts[t]
            if _GHOST in vs:
                break
            rng.shuffle(order)
            for k in order:
                n = nbrs[t][k]
                if n == prev:
                    continue
                q = list(vs)
                q[k] = p
                if pred.orient(q) < 0:
                    prev, t = t, n
                    break
            else:
                break
        # conflict region
        region = {t}
        clear: set[int] = set()
        stack = [t]
        boundary = []
        while stack:
            c = stack.pop()
            for k in range(4):
                n = nbrs[c][k]
                if n in region:
                    continue
                if n not in clear:
                    if conflict(n, p):
                        region.add(n)
                        stack.append(n)
                        continue
                    clear.add(n)
                boundary.append((c, k))
        created = []
        for c, k in boundary:
            vs = list(verts[c])
            vs[k] = p
            nt = len(verts)
            verts.append(vs)
            nbrs.append([-1] * 4)
            dead.append(False)
            n = nbrs[c][k]
            nbrs[nt][k] = n
            nbrs[n][nbrs[n].index(c)] = nt
            created.append(nt)
        _link_new(verts, nbrs, created, {}, skip_vertex=p)
        for c in region:
            dead[c] = True
        last = next(nt for nt in created if _GHOST not in verts[nt])

    tets, hull = [], []
    for t, vs in enumerate(verts):
        if dead[t]:
            continue
        if _GHOST in vs:
            hull.append(tuple(sorted(v for v in vs if v != _GHOST)))
        else:
            tets.append(tuple(sorted(vs)))
    return sorted(tets), sorted(hull)


def _link_new(verts, nbrs, created, face_map, skip_vertex=None):
    for nt in created:
        vs = verts[nt]
        for j in range(4):
            if skip_vertex is not None and vs[j] == skip_vertex:
                continue
            if skip_vertex is None and nbrs[nt][j] != -1:
                continue
            key = frozenset(vs[:j] + vs[j + 1:])
            other = face_map.pop(key, None)
            if other is None:
                face_map[key] = (nt, j)
            else:
                ot, oj = other
                nbrs[nt][j] = ot
                nbrs[ot][oj] = nt


class DelaunayComplex:
    """All Delaunay simplices with explicit face/coface incidence.

    Simplices are sorted tuples of vertex ids. ``cofaces`` of a hull triangle
    include :data:`OMEGA`. Instances are treated as immutable after
    construction.

    Parameters
    ----------
    points : array_like, shape (n, 3)
        Coordinates; vertex ``i`` is row ``i``.
    tets : iterable of 4-tuples
        The tetrahedra. Lower-dimensional simplices, incidence and the hull
        (triangles with a single tetrahedron) are derived from them.
    """

    def __init__(self, points, tets: Iterable[Sequence[int]]):
        self.points = np.asarray(points, dtype=float).reshape(-1, 3)
        self.coords = [tuple(float(c) for c in p) for p in self.points]
        self._int_coords = None
        tets = sorted({tuple(sorted(t)) for t in tets})
        tris: dict[tuple, list] = {}
        edges: dict[tuple, list] = {}
        verts: dict[tuple, list] = {(v,): [] for v in range(len(self.points))}
        for t in tets:
            for f in itertools.combinations(t, 3):
                tris.setdefault(f, []).append(t)
        for f in tris:
            for e in itertools.combinations(f, 2):
                edges.setdefault(e, []).append(f)
        for e in edges:
            for v in e:
                verts[(v,)].append(e)
        self.hull = frozenset(f for f, cf in tris.items() if len(cf) == 1)
        for f in self.hull:
            tris[f].append(OMEGA)
        self._cofaces = {}
        for layer in (verts, edges, tris):
            for s, cf in layer.items():
                self._cofaces[s] = tuple(sorted(cf, key=canonical_key))
        for t in tets:
            self._cofaces[t] = ()
        self.vertices = sorted(verts)
        self.edges = sorted(edges)
        self.triangles = sorted(tris)
        self.tets = tets
        self._layers = (self.vertices, self.edges, self.triangles, self.tets)
        self._signs: dict[tuple, tuple] = {}
        self._spheres: dict[tuple, tuple] = {}
        self._pred = None
        self._g_table = None

    # -- incidence ---------------------------------------------------------
    def __contains__(self, s) -> bool:
        return s in self._cofaces

    def __len__(self) -> int:
        return len(self._cofaces)

    @property
    def n_points(self) -> int:
        return len(self.points)

    def simplices(self, dim: int | None = None) -> list[tuple]:
        if dim is not None:
            return list(self._layers[dim])
        return [s for layer in self._layers for s in layer]

    def _check(self, s):
        if s not in self._cofaces:
            raise UnknownSimplex(s)

    def faces(self, s) -> tuple:
        """Immediate faces (one dimension down)."""
        if s is OMEGA:
            return tuple(sorted(self.hull))
        self._check(s)
        if len(s) == 1:
            return ()
        return tuple(itertools.combinations(s, len(s) - 1))

    def cofaces(self, s) -> tuple:
        """Immediate cofaces (one dimension up); OMEGA for hull triangles."""
        if s is OMEGA:
            return ()
        self._check(s)
        return self._cofaces[s]

    def all_cofaces(self, s, include_exterior: bool = True) -> set:
        """Every proper coface of ``s`` (its up-set minus itself)."""
        self._check(s)
        out, frontier = set(), [s]
        while frontier:
            nxt = []
            for x in frontier:
                for c in self._cofaces.get(x, ()):
                    if c is OMEGA and not include_exterior:
                        continue
                    if c not in out:
                        out.add(c)
                        if c is not OMEGA:
                            nxt.append(c)
            frontier = nxt
        return out

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.triangles) - len(self.tets)

    # -- geometry ----------------------------------------------------------
    @property
    def int_coords(self) -> list[tuple[int, int, int]]:
        if self._int_coords is None:
            self._int_coords = kernel.scaled_integer_coords(self.coords)
        return self._int_coords

    def orientation(self, q) -> Sign:
        """Perturbed orient3d of four vertex ids."""
        if self._pred is None:
            self._pred = _Predicates(self.coords)
        return Sign(self._pred.orient(q))

    def is_degenerate(self, s) -> bool:
        """True when ``s`` is affinely dependent before perturbation."""
        if len(s) == 1:
            return False
        _, det = kernel._bary_parts([self.int_coords[v] for v in s])
        return det == 0

    def circumcenter_signs(self, s) -> tuple[Sign, ...]:
        """Barycentric signs of the circumcenter of ``s``, one per vertex.

        Exact; affinely degenerate simplices (flat hull slivers produced by the
        perturbation) are evaluated under the symbolic perturbation.
        """
        out = self._signs.get(s)
        if out is None:
            if len(s) == 1:
                out = (Sign.POSITIVE,)
            else:
                pts = [self.int_coords[v] for v in s]
                nums, det = kernel._bary_parts(pts)
                if det != 0:
                    sd = kernel._sgn(det)
                    out = tuple(Sign(kernel._sgn(n) * sd) for n in nums)
                else:
                    out = kernel.perturbed_circumcenter_signs(pts, ids=s)
            self._signs[s] = out
        return out

    def circumsphere(self, s) -> tuple[np.ndarray, float]:
        """Floating circumcenter and squared radius; ``(nan, inf)`` if degenerate."""
        out = self._spheres.get(s)
        if out is None:
            if len(s) == 1:
                out = (self.points[s[0]].copy(), 0.0)
            elif self.is_degenerate(s):
                out = (np.full(3, np.nan), math.inf)
            else:
                cs = kernel.circumsphere([self.coords[v] for v in s])
                out = (np.array(cs.center, dtype=float), float(cs.squared_radius))
            self._spheres[s] = out
        return out

    # -- serialization -----------------------------------------------------
    def dump(self) -> str:
        return dump_simplices(self.simplices())


def dump_simplices(simplices: Iterable) -> str:
    """Line format ``dim v0 v1 ...``, one simplex per line, canonical order."""
    lines = [f"{len(s) - 1} " + " ".join(map(str, s))
             for s in sorted(simplices, key=canonical_key) if s is not OMEGA]
    return "\n".join(lines) + ("\n" if lines else "")


def build(points) -> DelaunayComplex:
    """Delaunay complex of ``points`` (rows or :class:`~wrapsurf.kernel.Point3`).

    Vertex ids are positions in the input; insertion follows input order.

    Raises
    ------
    TooFewPoints, DuplicatePoint, DegenerateInput
    """
    coords = _validate(list(points))
    tets, _ = _triangulate(coords)
    return DelaunayComplex(coords, tets)


# ---------------------------------------------------------------------------
# brute-force oracle


def brute_force_delaunay(points) -> list[tuple]:
    """All 4-subsets with an empty (perturbed) circumsphere; O(n^5)."""
    coords = [tuple(float(c) for c in p[:3]) for p in points]
    pred = _Predicates(coords)
    out = []
    n = len(coords)
    for q in itertools.combinations(range(n), 4):
        o = pred.orient(q)
        if all(pred.insphere(q, p) * o < 0 for p in range(n) if p not in q):
            out.append(q)
    return out


@dataclass
class DelaunayReport:
    non_empty: list = field(default_factory=list)  # (tet, offending point)
    missing: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.non_empty and not self.missing


def verify_delaunay(complex_: DelaunayComplex, points=None) -> DelaunayReport:
    """Compare a complex against the brute-force empty-sphere oracle."""
    coords = complex_.coords if points is None else [tuple(map(float, p[:3])) for p in points]
    pred = _Predicates(coords)
    report = DelaunayReport()
    n = len(coords)
    for t in complex_.tets:
        o = pred.orient(t)
        for p in range(n):
            if p not in t and pred.insphere(t, p) * o > 0:
                report.non_empty.append((t, p))
                break
    have = set(complex_.tets)
    report.missing = [q for q in brute_force_delaunay(coords) if q not in have]
    return report


def local_violations(complex_: DelaunayComplex) -> list[tuple]:
    """Pairs ``(tet, apex)`` where a neighbour's far vertex lies inside the sphere.

    Local emptiness at every interior triangle together with a locally convex
    boundary implies global emptiness, so this is a linear-time check. A
    complex with the wrong Euler characteristic is reported as ``(None, chi)``;
    a reflex hull edge as ``(hull triangle, far vertex)``.
    """
    chi = complex_.euler_characteristic()
    if chi != 1:
        return [(None, chi)]
    pred = complex_._pred or _Predicates(complex_.coords)
    complex_._pred = pred
    bad = []
    for f in complex_.triangles:
        cf = [c for c in complex_.cofaces(f) if c is not OMEGA]
        if len(cf) != 2:
            continue
        a, b = cf
        apex = next(x for x in b if x not in f)
        if pred.insphere(a, apex) * pred.orient(a) > 0:
            bad.append((a, apex))
    # the hull must be locally convex across each of its edges
    by_edge: dict[tuple, list] = {}
    for f in complex_.hull:
        for e in itertools.combinations(f, 2):
            by_edge.setdefault(e, []).append(f)
    for e, fs in by_edge.items():
        if len(fs) != 2:
            bad.append((None, e))
            continue
        for f, g in (fs, fs[::-1]):
            tet = next(c for c in complex_.cofaces(f) if c is not OMEGA)
            inner = next(x for x in tet if x not in f)
            other = next(x for x in g if x not in e)
            if pred.orient(f + (inner,)) * pred.orient(f + (other,)) < 0:
                bad.append((f, other))
    return bad
