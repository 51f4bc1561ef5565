"""Carving the Delaunay complex from the outside in.

Starting with only the exterior cell removed, free faces are collapsed as
long as the flow runs through them into already removed space. What survives
is the wrap complex ``X_0``; its boundary is the wrap surface. Deleting the
most significant remaining sink and collapsing again yields the nested family
``X_0 > X_1 > ... > {}``.
"""
from __future__ import annotations

import heapq
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field

from . import flow
from .delaunay import OMEGA, DelaunayComplex, canonical_key
from .errors import NoSinks, NotCollapsible, NotFree, NotMaximalSink, UnknownSimplex
from .flow import CritInfo, PairClass

__all__ = [
    "Surface",
    "WrapStage",
    "Sculptor",
    "is_free",
    "collapsible",
    "collapse",
    "interval",
    "wrap",
    "delete_sink",
    "nested_family",
    "boundary_surface",
    "euler_genus",
    "euler_characteristic",
    "stage_violations",
]


def interval(v, tau) -> list[tuple]:
    """All simplices ``xi`` with ``v <= xi <= tau``."""
    extra = [x for x in tau if x not in v]
    out = []
    for r in range(len(extra) + 1):
        for comb in itertools.combinations(extra, r):
            out.append(tuple(sorted(v + comb)))
    return out


def euler_characteristic(simplices) -> int:
    return sum((-1) ** (len(s) - 1) for s in simplices if s is not OMEGA)


class Sculptor:
    """Mutable carving state: the current subcomplex ``K`` and the removed set.

    Parameters
    ----------
    complex_ : DelaunayComplex
    K : iterable of simplices, optional
        Current subcomplex; the full complex by default.
    removed : iterable, optional
        Everything carved so far (may contain OMEGA).
    """

    def __init__(self, complex_: DelaunayComplex, K=None, removed=()):
        self.cx = complex_
        self.K = set(complex_.simplices()) if K is None else {s for s in K if s is not OMEGA}
        self.removed = set(removed)
        self._crit_full: dict = {}

    # -- predicates --------------------------------------------------------
    def star(self, v) -> list[tuple]:
        if v not in self.K:
            raise UnknownSimplex(v)
        seen, frontier = {v}, [v]
        while frontier:
            nxt = []
            for x in frontier:
                for c in self.cx.cofaces(x):
                    if c is not OMEGA and c in self.K and c not in seen:
                        seen.add(c)
                        nxt.append(c)
            frontier = nxt
        return list(seen)

    def free_top(self, v):
        """The unique maximal coface ``tau != v`` with star(v) = [v, tau], else None."""
        tops = [s for s in self.star(v)
                if not any(c is not OMEGA and c in self.K for c in self.cx.cofaces(s))]
        if len(tops) != 1 or tops[0] == v:
            return None
        return tops[0]

    def _critical_in_full(self, v) -> bool:
        out = self._crit_full.get(v)
        if out is None:
            out = self._crit_full[v] = flow.is_critical(v, self.cx)
        return out

    def collapsible(self, v, tau) -> bool:
        if not flow.flows_through(tau, v, self.cx):
            return False
        signs = self.cx.circumcenter_signs(tau)
        if any(signs[k] < 0 for k, x in enumerate(tau) if x in v):
            return False  # only part of tau's flow interval; would strand the rest
        if self._critical_in_full(v):
            return False
        # the flow must leave the interval into carved space somewhere
        for xi in interval(v, tau):
            for c in self.cx.cofaces(xi):
                if c in self.removed and flow.classify(xi, c, self.cx) is PairClass.TOWARD_COFACE:
                    return True
        return False

    # -- mutation ----------------------------------------------------------
    def collapse(self, v, tau) -> list[tuple]:
        gone = interval(v, tau)
        for s in gone:
            self.K.discard(s)
            self.removed.add(s)
        return gone

    def _touched(self, gone) -> set:
        """Surviving faces of removed simplices; their stars changed."""
        out = set()
        for s in gone:
            for r in range(1, len(s)):
                for f in itertools.combinations(s, r):
                    if f in self.K:
                        out.add(f)
        return out

    def run(self, candidates, rng: random.Random | None = None) -> int:
        """Collapse until no candidate is collapsible; returns the collapse count.

        Candidates are processed in canonical order, or in random order when
        ``rng`` is given (used to exercise confluence).
        """
        pending = set(c for c in candidates if c is not OMEGA)
        heap = None
        if rng is None:
            heap = [(canonical_key(c), c) for c in pending]
            heapq.heapify(heap)
        else:
            bag = sorted(pending, key=canonical_key)
            rng.shuffle(bag)
        count = 0
        while pending:
            if heap is not None:
                _, v = heapq.heappop(heap)
            else:
                k = rng.randrange(len(bag))
                bag[k], bag[-1] = bag[-1], bag[k]
                v = bag.pop()
            pending.discard(v)
            if v not in self.K:
                continue
            tau = self.free_top(v)
            if tau is None or not self.collapsible(v, tau):
                continue
            count += 1
            gone = self.collapse(v, tau)
            for f in self._touched(gone):
                if f not in pending:
                    pending.add(f)
                    if heap is not None:
                        heapq.heappush(heap, (canonical_key(f), f))
                    else:
                        bag.append(f)
        return count

    def delete(self, sink, upward: bool = True) -> list[tuple]:
        """Remove ``sink``; with ``upward`` also its cofaces still in ``K``."""
        if sink not in self.K:
            raise UnknownSimplex(sink)
        up = [s for s in self.star(sink) if s != sink]
        if up and not upward:
            raise NotMaximalSink(f"{sink} still has cofaces {sorted(up)}")
        gone = sorted([sink] + up, key=canonical_key)
        for s in gone:
            self.K.discard(s)
            self.removed.add(s)
        return gone


# ---------------------------------------------------------------------------
# functional surface


def is_free(v, K, complex_: DelaunayComplex):
    """Return the top coface ``tau`` if ``v`` is a free face of ``K``, else None."""
    return Sculptor(complex_, K).free_top(v)


def collapsible(v, tau, K, removed, complex_: DelaunayComplex) -> bool:
    sc = Sculptor(complex_, K, removed)
    if sc.free_top(v) != tau:
        raise NotFree(f"{v} is not free with top coface {tau}")
    return sc.collapsible(v, tau)


def collapse(v, tau, K, complex_: DelaunayComplex, removed=()) -> frozenset:
    """Return ``K`` minus the interval ``[v, tau]``."""
    sc = Sculptor(complex_, K, removed)
    try:
        ok = sc.free_top(v) == tau and sc.collapsible(v, tau)
    except UnknownSimplex:
        ok = False
    if not ok:
        raise NotCollapsible(f"({v}, {tau}) is not a collapsible pair")
    sc.collapse(v, tau)
    return frozenset(sc.K)


@dataclass
class Surface:
    """Boundary triangles of a subcomplex.

    ``triangles`` hold vertex ids ordered so the right-hand normal points
    away from the unique tetrahedron behind them; ``dangling`` triangles have
    no tetrahedron and keep sorted order.
    """

    triangles: list[tuple]
    dangling: list[tuple] = field(default_factory=list)
    isolated_edges: int = 0
    isolated_vertices: int = 0

    @property
    def all_triangles(self) -> list[tuple]:
        return self.triangles + self.dangling

    def _edge_use(self):
        use = defaultdict(list)
        for t in self.all_triangles:
            for k in range(3):
                a, b = t[k], t[(k + 1) % 3]
                use[(min(a, b), max(a, b))].append((a, b))
        return use

    @property
    def closed(self) -> bool:
        return not self.dangling and all(len(u) == 2 for u in self._edge_use().values())

    @property
    def orientable(self) -> bool:
        """Every edge is used once in each direction."""
        return all(len(u) == 2 and u[0] == u[1][::-1] for u in self._edge_use().values())

    @property
    def manifold(self) -> bool:
        """Closed 2-manifold: edges shared by two triangles, vertex links single cycles."""
        if not self.closed:
            return False
        link = defaultdict(list)
        for t in self.all_triangles:
            for k in range(3):
                link[t[k]].append((t[(k + 1) % 3], t[(k + 2) % 3]))
        for ring in link.values():
            adj = defaultdict(list)
            for a, b in ring:
                adj[a].append(b)
                adj[b].append(a)
            if any(len(n) != 2 for n in adj.values()):
                return False
            start = next(iter(adj))
            seen, stack = {start}, [start]
            while stack:
                for n in adj[stack.pop()]:
                    if n not in seen:
                        seen.add(n)
                        stack.append(n)
            if len(seen) != len(adj):
                return False
        return True

    @property
    def components(self) -> int:
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for t in self.all_triangles:
            for v in t[1:]:
                parent[find(v)] = find(t[0])
        return len({find(v) for t in self.all_triangles for v in t})

    def report(self) -> dict:
        chi, genus = euler_genus(self)
        return {
            "triangles": len(self.triangles),
            "dangling": len(self.dangling),
            "closed": self.closed,
            "manifold": self.manifold,
            "orientable": self.orientable,
            "components": self.components,
            "chi": chi,
            "genus": genus,
            "isolated_edges": self.isolated_edges,
            "isolated_vertices": self.isolated_vertices,
        }


def boundary_surface(K, complex_: DelaunayComplex) -> Surface:
    """Triangles of ``K`` with at most one tetrahedron of ``K`` behind them."""
    K = K if isinstance(K, (set, frozenset)) else set(K)
    oriented, dangling = [], []
    for t in sorted(s for s in K if s is not OMEGA and len(s) == 3):
        behind = [c for c in complex_.cofaces(t) if c is not OMEGA and c in K]
        if len(behind) == 1:
            apex = next(x for x in behind[0] if x not in t)
            a, b, c = t
            if complex_.orientation((a, b, c, apex)) > 0:
                b, c = c, b
            oriented.append((a, b, c))
        elif not behind:
            dangling.append(t)
    tri_edges = {e for t in K if t is not OMEGA and len(t) == 3
                 for e in itertools.combinations(t, 2)}
    edges = [e for e in K if e is not OMEGA and len(e) == 2]
    covered = {v for e in edges for v in e}
    return Surface(
        oriented,
        dangling,
        isolated_edges=sum(1 for e in edges if e not in tri_edges),
        isolated_vertices=sum(1 for s in K if s is not OMEGA and len(s) == 1 and s[0] not in covered),
    )


def euler_genus(surface) -> tuple[int, int | None]:
    """(chi, genus); genus only for closed connected orientable manifolds."""
    tris = surface.all_triangles if isinstance(surface, Surface) else [tuple(t) for t in surface]
    verts = {v for t in tris for v in t}
    edges = {(min(t[i], t[j]), max(t[i], t[j])) for t in tris for i, j in ((0, 1), (1, 2), (0, 2))}
    chi = len(verts) - len(edges) + len(tris)
    surf = surface if isinstance(surface, Surface) else Surface(list(tris))
    if tris and surf.manifold and surf.orientable and surf.components == 1:
        return chi, (2 - chi) // 2
    return chi, None


@dataclass
class WrapStage:
    index: int
    complex: frozenset
    surface: Surface
    deleted_sink: CritInfo | None
    deleted: tuple
    sink_log: list[CritInfo]
    collapses: int

    @property
    def counts(self) -> dict:
        c = [0, 0, 0, 0]
        for s in self.complex:
            c[len(s) - 1] += 1
        return dict(zip("veft", c))

    @property
    def chi_complex(self) -> int:
        return euler_characteristic(self.complex)

    @property
    def stats(self) -> dict:
        rep = self.surface.report()
        sink = None
        if self.deleted_sink is not None:
            sink = {"verts": list(self.deleted_sink.simplex),
                    "rho2": self.deleted_sink.significance}
        return {
            "index": self.index,
            "counts": self.counts,
            "chi_complex": self.chi_complex,
            "chi_surface": rep["chi"],
            "manifold": rep["manifold"],
            "deleted_sink": sink,
        }


def _stage(sc: Sculptor, index, deleted_sink=None, deleted=(), collapses=0) -> WrapStage:
    K = frozenset(sc.K)
    return WrapStage(
        index=index,
        complex=K,
        surface=boundary_surface(K, sc.cx),
        deleted_sink=deleted_sink,
        deleted=tuple(deleted),
        sink_log=flow.sinks(sc.cx, K),
        collapses=collapses,
    )


def wrap(complex_: DelaunayComplex, rng: random.Random | None = None,
         _sculptor: Sculptor | None = None) -> WrapStage:
    """Stage 0: remove OMEGA and collapse inward from the hull.

    ``rng`` randomizes the worklist order; the result does not depend on it.
    """
    sc = _sculptor or Sculptor(complex_)
    sc.removed.add(OMEGA)
    seeds = {f for t in complex_.hull for r in (1, 2, 3) for f in itertools.combinations(t, r)}
    n = sc.run(seeds, rng=rng)
    return _stage(sc, 0, collapses=n)


def delete_sink(complex_: DelaunayComplex, K, removed=(), upward: bool = True):
    """Delete the most significant sink of ``K``.

    Returns ``(K', removed', info, deleted)``. When the sink still has
    cofaces in ``K`` they are deleted with it (``upward=True``) or
    ``NotMaximalSink`` is raised.
    """
    ranked = flow.sinks(complex_, K)
    if not ranked:
        raise NoSinks("no critical simplex left")
    sc = Sculptor(complex_, K, removed)
    gone = sc.delete(ranked[0].simplex, upward=upward)
    return frozenset(sc.K), frozenset(sc.removed), ranked[0], gone


def nested_family(complex_: DelaunayComplex, max_stages: int | None = None,
                  rng: random.Random | None = None) -> list[WrapStage]:
    """``[X_0, X_1, ...]``: alternate sink deletion and collapsing until empty."""
    sc = Sculptor(complex_)
    stages = [wrap(complex_, rng=rng, _sculptor=sc)]
    while sc.K and (max_stages is None or len(stages) < max_stages):
        ranked = stages[-1].sink_log
        if not ranked:
            raise NoSinks(f"stage {len(stages) - 1} is nonempty but has no sink")
        gone = sc.delete(ranked[0].simplex)
        n = sc.run(sc._touched(gone), rng=rng)
        stages.append(_stage(sc, len(stages), ranked[0], gone, n))
    return stages


def stage_violations(stages, complex_: DelaunayComplex) -> list[str]:
    """Invariant breaches of a nested family; empty when everything holds."""
    problems = []
    for st in stages:
        K = st.complex
        for s in K:
            for r in range(1, len(s)):
                for f in itertools.combinations(s, r):
                    if f not in K:
                        problems.append(f"stage {st.index}: face {f} of {s} missing")
                        break
        for t in st.surface.all_triangles:
            key = tuple(sorted(t))
            if key not in K:
                problems.append(f"stage {st.index}: surface triangle {key} not in complex")
            elif sum(1 for c in complex_.cofaces(key) if c is not OMEGA and c in K) > 1:
                problems.append(f"stage {st.index}: surface triangle {key} is interior")
    if stages and any((v,) not in stages[0].complex for v in range(complex_.n_points)):
        problems.append("stage 0 lost an input vertex")
    for a, b in zip(stages, stages[1:]):
        if not b.complex < a.complex:
            problems.append(f"stage {b.index} is not strictly inside stage {a.index}")
    return problems
