import random

import numpy as np
import pytest

from wrapsurf import sculpt
from wrapsurf.delaunay import OMEGA, build, dump_simplices
from wrapsurf.errors import NoSinks, NotCollapsible, NotFree, NotMaximalSink
from wrapsurf.meshio import sample_sphere
from wrapsurf.sculpt import (
    Sculptor,
    Surface,
    boundary_surface,
    euler_characteristic,
    euler_genus,
    interval,
    nested_family,
    stage_violations,
    wrap,
)

UNIT = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
REGULAR = [(0, 0, 0), (1, 0, 0), (0.5, 0.866, 0), (0.5, 0.289, 0.816)]
T = (0, 1, 2, 3)


def cloud(seed, n):
    return np.random.default_rng(seed).uniform(-1, 1, size=(n, 3))


def grid_torus(n=4, m=4):
    idx = lambda i, j: (i % n) * m + (j % m)  # noqa: E731
    tris = []
    for i in range(n):
        for j in range(m):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris += [(a, b, c), (a, c, d)]
    return tris


@pytest.fixture
def unit():
    return build(UNIT)


def test_interval():
    assert sorted(interval((1, 2, 3), T)) == [(0, 1, 2, 3), (1, 2, 3)]
    assert len(interval((0, 1), T)) == 4
    assert len(interval((0,), T)) == 8


def test_is_free_examples(unit):
    K = set(unit.simplices())
    assert sculpt.is_free((1, 2, 3), K, unit) == T
    assert sculpt.is_free((0, 1), K, unit) == T  # star(e) is the whole interval [e, T]
    assert sculpt.is_free(T, K, unit) is None
    assert sculpt.is_free((0, 1, 2), K - {T}, unit) is None


def test_collapsible_examples(unit):
    K = set(unit.simplices())
    assert sculpt.collapsible((1, 2, 3), T, K, {OMEGA}, unit)
    assert not sculpt.collapsible((0, 1, 2), T, K, {OMEGA}, unit)
    assert not sculpt.collapsible((1, 2, 3), T, K, set(), unit)
    with pytest.raises(NotFree):
        sculpt.collapsible((0, 1, 2), T, K - {T}, {OMEGA}, unit)


def test_collapse_examples(unit):
    K = set(unit.simplices())
    K2 = sculpt.collapse((1, 2, 3), T, K, unit, removed={OMEGA})
    assert K - K2 == {(1, 2, 3), T}
    assert [sum(1 for s in K2 if len(s) == d) for d in (1, 2, 3)] == [4, 6, 3]
    assert euler_characteristic(K2) == euler_characteristic(K)
    with pytest.raises(NotCollapsible):
        sculpt.collapse((0, 1, 2), T, K, unit, removed={OMEGA})


def test_edge_collapse_removes_four(unit):
    sc = Sculptor(unit)
    before = euler_characteristic(sc.K)
    gone = sc.collapse((0, 1), T)
    assert len(gone) == 4 and set(gone) == {(0, 1), (0, 1, 2), (0, 1, 3), T}
    assert euler_characteristic(sc.K) == before


def test_wrap_regular_tet_keeps_everything():
    cx = build(REGULAR)
    st = wrap(cx)
    assert st.complex == frozenset(cx.simplices())
    assert len(st.surface.triangles) == 4 and st.surface.closed
    assert st.surface.report()["chi"] == 2


def test_nested_family_regular_tet():
    cx = build(REGULAR)
    stages = nested_family(cx)
    assert stages[1].deleted_sink.simplex == T
    assert stages[1].counts == {"v": 4, "e": 6, "f": 4, "t": 0}
    assert stages[-1].complex == frozenset()
    assert nested_family(cx, max_stages=1)[0].index == 0
    assert len(nested_family(cx, max_stages=1)) == 1


def test_delete_sink_errors():
    cx = build(REGULAR)
    K = set(cx.simplices())
    K2, removed, info, gone = sculpt.delete_sink(cx, K, {OMEGA})
    assert info.simplex == T and gone == [T]
    assert len([s for s in K2 if len(s) == 3]) == 4
    with pytest.raises(NoSinks):
        sculpt.delete_sink(cx, set(), {OMEGA})
    with pytest.raises(NotMaximalSink):
        Sculptor(cx, K).delete((0, 1, 2), upward=False)


def test_boundary_surface_examples(unit):
    one = boundary_surface(set(unit.simplices()), unit)
    assert len(one.triangles) == 4 and one.closed and one.manifold and one.orientable
    assert euler_genus(one) == (2, 0)
    two = build(UNIT + [(1, 1, 1)])
    tets = two.tets
    assert len(tets) == 2
    s = boundary_surface(set(two.simplices()), two)
    assert len(s.triangles) == 6 and s.closed
    dangling = boundary_surface(set(unit.simplices()) - {T}, unit)
    assert len(dangling.dangling) == 4 and not dangling.manifold


def test_boundary_orientation_points_outward():
    pts = cloud(2, 40)
    cx = build(pts)
    s = boundary_surface(set(cx.simplices()), cx)
    P = cx.points
    centroid = P.mean(axis=0)
    for a, b, c in s.triangles:
        n = np.cross(P[b] - P[a], P[c] - P[a])
        assert n @ (P[a] - centroid) > 0


def test_euler_genus_examples():
    assert euler_genus(grid_torus()) == (0, 1)
    bowtie = [(0, 1, 2), (0, 3, 4)]
    chi, genus = euler_genus(bowtie)
    assert chi == 1 and genus is None


def test_surface_flags_pinched_vertex():
    # two tetrahedron boundaries glued at a single vertex
    a = [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)]
    b = [(0, 5, 4), (0, 4, 6), (0, 6, 5), (4, 5, 6)]
    s = Surface(a + b)
    assert s.closed and s.orientable and not s.manifold


@pytest.mark.parametrize("seed", range(3))
def test_confluence(seed):
    cx = build(cloud(seed, 30))
    ref = dump_simplices(wrap(cx).complex)
    for k in range(10):
        assert dump_simplices(wrap(cx, rng=random.Random(k)).complex) == ref


@pytest.mark.parametrize("seed", range(3))
def test_wrap_invariants(seed):
    cx = build(cloud(seed, 60))
    st = wrap(cx)
    assert st.chi_complex == 1
    assert all((v,) in st.complex for v in range(cx.n_points))
    assert stage_violations([st], cx) == []


def test_sphere_wraps_to_sphere():
    cx = build(sample_sphere(120, jitter=0.02, seed=1))
    rep = wrap(cx).surface.report()
    assert rep["closed"] and rep["manifold"] and rep["orientable"]
    assert (rep["chi"], rep["components"], rep["genus"]) == (2, 1, 0)


def test_nested_family_bookkeeping():
    cx = build(cloud(7, 40))
    stages = nested_family(cx)
    assert stages[-1].complex == frozenset()
    assert stage_violations(stages, cx) == []
    for a, b in zip(stages, stages[1:]):
        assert b.complex < a.complex
        # collapses keep chi, so only the deleted simplices change it
        assert b.chi_complex == a.chi_complex - euler_characteristic(b.deleted)
        assert b.deleted_sink.simplex in b.deleted


def test_stage_violations_detects_breaches():
    cx = build(cloud(8, 20))
    stages = nested_family(cx, max_stages=3)
    broken = sculpt.WrapStage(9, stages[1].complex - {(0,)}, stages[1].surface,
                              None, (), [], 0)
    msgs = stage_violations([stages[0], broken], cx)
    assert any("missing" in m for m in msgs)
    same = stage_violations([stages[0], stages[0]], cx)
    assert any("strictly" in m for m in same)
