"""Combinatorial flow on the Delaunay complex.

Inside a tetrahedron ``T`` the potential is ``g(x) = r^2 - |z - x|^2`` with
``(z, r)`` the circumsphere of ``T``; it is zero at the vertices, peaks at the
circumcenter and is treated as infinite outside the hull. Steepest ascent
moves straight toward ``z``, so every flow decision reduces to the side of a
face hyperplane on which a circumcenter lies, i.e. to the signs of the
circumcenter's barycentric coordinates. Those signs are exact.
"""
from __future__ import annotations

import csv
import enum
import graphlib
import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .delaunay import OMEGA, DelaunayComplex, canonical_key
from .errors import NotIncident, UnknownSimplex

__all__ = [
    "PairClass",
    "CritInfo",
    "classify",
    "flows_through",
    "center_in_interior",
    "is_critical",
    "significance",
    "sinks",
    "g_at",
    "g_envelope",
    "flow_edges",
    "check_acyclic",
    "integrate_flow",
    "write_diagnostics",
]


class PairClass(enum.Enum):
    TOWARD_COFACE = "toward_coface"  # v -> sigma
    TOWARD_FACE = "toward_face"  # sigma -> v


@dataclass(frozen=True)
class CritInfo:
    simplex: tuple
    is_critical: bool
    significance: float


def _check_facet(v, sigma, complex_: DelaunayComplex):
    if sigma not in complex_ or v not in complex_:
        raise NotIncident(f"{v} / {sigma} not in complex")
    if len(sigma) != len(v) + 1 or not set(v) < set(sigma):
        raise NotIncident(f"{v} is not a facet of {sigma}")


def classify(v, sigma, complex_: DelaunayComplex) -> PairClass:
    """Direction of flow across the immediate pair ``v < sigma``.

    Hull triangles always flow out into ``OMEGA``. Otherwise the flow enters
    ``sigma`` iff its circumcenter lies strictly on the apex side of aff(v);
    a circumcenter on the hyperplane counts as flowing into the face.
    """
    if sigma is OMEGA:
        if v not in complex_.hull:
            raise NotIncident(f"{v} is not a hull triangle")
        return PairClass.TOWARD_COFACE
    _check_facet(v, sigma, complex_)
    apex = next(x for x in sigma if x not in v)
    s = complex_.circumcenter_signs(sigma)[sigma.index(apex)]
    return PairClass.TOWARD_COFACE if s > 0 else PairClass.TOWARD_FACE


def flows_through(tau, v, complex_: DelaunayComplex) -> bool:
    """True iff flow inside ``tau`` exits through the interior of its face ``v``.

    That is the case when the circumcenter of ``tau`` lies strictly beyond
    every facet of ``tau`` that contains ``v``.
    """
    if tau not in complex_ or v not in complex_ or not set(v) < set(tau):
        raise NotIncident(f"{v} is not a proper face of {tau}")
    signs = complex_.circumcenter_signs(tau)
    return all(signs[k] < 0 for k, x in enumerate(tau) if x not in v)


def center_in_interior(xi, complex_: DelaunayComplex) -> bool:
    return all(s > 0 for s in complex_.circumcenter_signs(xi))


def is_critical(xi, complex_: DelaunayComplex, K=None) -> bool:
    """Whether ``xi`` is a sink relative to the subcomplex ``K``.

    ``K`` is any container of simplices; OMEGA counts as a coface only while
    it is in ``K``. ``K=None`` means the full complex together with OMEGA.
    """
    if xi not in complex_ or (K is not None and xi not in K):
        raise UnknownSimplex(xi)
    if not center_in_interior(xi, complex_):
        return False
    for c in complex_.cofaces(xi):
        if K is not None and c not in K:
            continue
        if classify(xi, c, complex_) is PairClass.TOWARD_COFACE:
            return False
    return True


def significance(xi, complex_: DelaunayComplex) -> float:
    """Squared circumradius, the value of g at the sink's fixed point."""
    return complex_.circumsphere(xi)[1]


def sinks(complex_: DelaunayComplex, K=None) -> list[CritInfo]:
    """Critical simplices of ``K``, most significant first.

    Ties are broken by canonical simplex order.
    """
    pool = complex_.simplices() if K is None else [s for s in K if s is not OMEGA]
    found = [CritInfo(s, True, significance(s, complex_))
             for s in pool if is_critical(s, complex_, K)]
    found.sort(key=lambda c: (-c.significance, canonical_key(c.simplex)))
    return found


# ---------------------------------------------------------------------------
# the potential g


class _TetTable:
    def __init__(self, complex_: DelaunayComplex):
        good = [t for t in complex_.tets if not complex_.is_degenerate(t)]
        self.tets = good
        P = complex_.points
        if good:
            V = P[np.array(good)]  # (m, 4, 3)
            self.base = V[:, 0, :]
            E = np.transpose(V[:, 1:, :] - V[:, :1, :], (0, 2, 1))  # columns are edges
            self.inv = np.linalg.inv(E)
            self.centers = np.array([complex_.circumsphere(t)[0] for t in good])
            self.r2 = np.array([complex_.circumsphere(t)[1] for t in good])
            self.verts = V
        else:
            self.inv = np.zeros((0, 3, 3))

    def locate(self, x, tol=1e-12) -> int:
        """Index of a tetrahedron containing ``x``, or -1."""
        if not len(self.tets):
            return -1
        lam = np.einsum("mij,mj->mi", self.inv, x - self.base)
        bary = np.concatenate([1.0 - lam.sum(axis=1, keepdims=True), lam], axis=1)
        hit = np.flatnonzero(bary.min(axis=1) >= -tol)
        if hit.size == 0:
            return -1
        return int(hit[np.argmax(bary[hit].min(axis=1))])


def _table(complex_: DelaunayComplex) -> _TetTable:
    tab = complex_._g_table
    if tab is None:
        tab = _TetTable(complex_)
        complex_._g_table = tab
    return tab


def g_at(x, complex_: DelaunayComplex) -> float:
    """g(x); ``math.inf`` outside the convex hull.

    Exactly zero at the input points.
    """
    tab = _table(complex_)
    x = np.asarray(x, dtype=float)
    k = tab.locate(x)
    if k < 0:
        return math.inf
    if (tab.verts[k] == x).all(axis=1).any():
        return 0.0
    d = tab.centers[k] - x
    return float(tab.r2[k] - d @ d)


def g_envelope(x, complex_: DelaunayComplex) -> float:
    """g(x) as the upper envelope ``max_T r_T^2 - |z_T - x|^2`` over all tetrahedra.

    Agrees with :func:`g_at` inside the hull (the lifting-map identity); used
    as an independent cross-check.
    """
    tab = _table(complex_)
    x = np.asarray(x, dtype=float)
    if tab.locate(x) < 0:
        return math.inf
    d = tab.centers - x
    return float(np.max(tab.r2 - np.einsum("ij,ij->i", d, d)))


def integrate_flow(complex_: DelaunayComplex, x0, step: float = 0.05,
                   max_steps: int = 2000, tol: float = 1e-10):
    """Explicit Euler for ``dx/dt = z_T(x) - x``.

    Returns ``(trajectory, g_values, tets)`` where ``tets`` lists the
    containing tetrahedron at every sample (``None`` once outside the hull).
    Integration stops at a fixed point or when the hull is left.
    """
    tab = _table(complex_)
    x = np.asarray(x0, dtype=float).copy()
    traj, gs, cells = [], [], []
    for _ in range(max_steps):
        k = tab.locate(x)
        traj.append(x.copy())
        cells.append(tab.tets[k] if k >= 0 else None)
        if k < 0:
            gs.append(math.inf)
            break
        d = tab.centers[k] - x
        gs.append(float(tab.r2[k] - d @ d))
        if d @ d <= tol * tol * max(tab.r2[k], 1e-300):
            break
        x = x + step * d
    return np.array(traj), np.array(gs), cells


# ---------------------------------------------------------------------------
# the relation as a graph


def flow_edges(complex_: DelaunayComplex) -> Iterable[tuple]:
    """Directed edges ``(a, b)`` meaning ``a -> b`` for every flow pair."""
    for s in complex_.simplices():
        if len(s) == 1:
            continue
        for f in itertools.combinations(s, len(s) - 1):
            if classify(f, s, complex_) is PairClass.TOWARD_COFACE:
                yield (f, s)
            else:
                yield (s, f)
        for k in range(1, len(s) - 1):
            for v in itertools.combinations(s, k):
                if flows_through(s, v, complex_):
                    yield (s, v)
    for f in sorted(complex_.hull):
        yield (f, OMEGA)


def check_acyclic(complex_: DelaunayComplex, extra_edges: Iterable[tuple] = ()):
    """Topologically sort the flow relation.

    Returns ``(True, None)`` or ``(False, cycle)`` where ``cycle`` is a list of
    nodes whose first and last entries coincide.
    """
    graph: dict = {}
    for a, b in itertools.chain(flow_edges(complex_), extra_edges):
        graph.setdefault(b, set()).add(a)
        graph.setdefault(a, set())
    try:
        tuple(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as exc:
        return False, list(exc.args[1])
    return True, None


def write_diagnostics(complex_: DelaunayComplex, fh) -> None:
    """CSV rows: simplex, per-coface classes, is_critical, significance."""
    w = csv.writer(fh)
    w.writerow(["simplex", "cofaces", "is_critical", "significance"])
    for s in complex_.simplices():
        parts = []
        for c in complex_.cofaces(s):
            name = "omega" if c is OMEGA else "-".join(map(str, c))
            parts.append(f"{name}:{classify(s, c, complex_).value}")
        w.writerow(["-".join(map(str, s)), ";".join(parts),
                    int(is_critical(s, complex_)), repr(significance(s, complex_))])
