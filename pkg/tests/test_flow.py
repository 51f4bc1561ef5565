import io
import itertools
import math
import random

import numpy as np
import pytest

from wrapsurf import flow
from wrapsurf.delaunay import OMEGA, build
from wrapsurf.errors import NotIncident, UnknownSimplex
from wrapsurf.flow import PairClass

UNIT = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
REGULAR = [(0, 0, 0), (1, 0, 0), (0.5, 0.866, 0), (0.5, 0.289, 0.816)]
T = (0, 1, 2, 3)


def random_cloud(seed, n):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1, 1, size=(n, 3))


@pytest.fixture(scope="module")
def unit():
    return build(UNIT)


def test_classify_examples(unit):
    assert flow.classify((0, 1, 2), T, unit) is PairClass.TOWARD_COFACE
    assert flow.classify((1, 2, 3), T, unit) is PairClass.TOWARD_FACE
    for f in unit.hull:
        assert flow.classify(f, OMEGA, unit) is PairClass.TOWARD_COFACE


def test_classify_rejects_non_pairs(unit):
    with pytest.raises(NotIncident):
        flow.classify((0, 1), T, unit)
    with pytest.raises(NotIncident):
        flow.classify((0, 1), OMEGA, unit)


def test_flows_through_examples(unit):
    assert flow.flows_through(T, (1, 2, 3), unit)
    assert not flow.flows_through(T, (1, 2), unit)
    assert not flow.flows_through(T, (1,), unit)
    with pytest.raises(NotIncident):
        flow.flows_through(T, T, unit)


def test_flows_through_matches_classify_at_gap_one():
    cx = build(random_cloud(1, 30))
    for s in cx.tets + cx.triangles:
        for f in itertools.combinations(s, len(s) - 1):
            toward_face = flow.classify(f, s, cx) is PairClass.TOWARD_FACE
            # ties go to the face in classify but never count as crossing
            if not any(x == 0 for x in cx.circumcenter_signs(s)):
                assert flow.flows_through(s, f, cx) == toward_face


def test_is_critical_examples(unit):
    reg = build(REGULAR)
    K = set(reg.simplices())  # exterior already carved
    assert flow.is_critical(T, reg, K)
    assert not flow.is_critical(T, unit)
    for v in unit.vertices:
        assert not flow.is_critical(v, unit)
    with pytest.raises(UnknownSimplex):
        flow.is_critical((0, 1), reg, {T})


def test_hull_triangle_not_critical_while_omega_present():
    reg = build(REGULAR)
    for f in reg.hull:
        assert not flow.is_critical(f, reg)


def test_sinks_examples():
    reg = build(REGULAR)
    s = flow.sinks(reg)
    assert [c.simplex for c in s] == [T]
    r2 = reg.circumsphere(T)[1]
    assert s[0].significance == pytest.approx(r2)
    assert flow.sinks(reg, set()) == []


def test_sinks_sorted_and_ranked_by_radius():
    cx = build(random_cloud(3, 60))
    s = flow.sinks(cx)
    assert s
    sig = [c.significance for c in s]
    assert sig == sorted(sig, reverse=True)
    for c in s:
        assert flow.center_in_interior(c.simplex, cx)
        assert c.significance == cx.circumsphere(c.simplex)[1]


def test_no_interior_triangle_receives_both_tets():
    # the two circumcenters on the dual Voronoi edge can never both lie beyond
    cx = build(random_cloud(4, 120))
    for f in cx.triangles:
        cf = [c for c in cx.cofaces(f) if c is not OMEGA]
        if len(cf) == 2:
            assert not all(flow.classify(f, c, cx) is PairClass.TOWARD_FACE for c in cf)


def test_triangles_with_all_inflow_are_critical():
    from wrapsurf.sculpt import nested_family

    cx = build(random_cloud(4, 60))
    seen = 0
    for stage in nested_family(cx, max_stages=40):
        K = stage.complex
        for f in K:
            if len(f) != 3 or not flow.center_in_interior(f, cx):
                continue
            inside = [c for c in cx.cofaces(f) if c in K]
            if all(flow.classify(f, c, cx) is PairClass.TOWARD_FACE for c in inside):
                assert flow.is_critical(f, cx, K)
                seen += 1
    assert seen > 0


def test_classify_is_order_independent():
    cx = build(random_cloud(5, 25))
    pairs = [(f, s) for s in cx.simplices() if len(s) > 1
             for f in itertools.combinations(s, len(s) - 1)]
    first = {p: flow.classify(*p, cx) for p in pairs}
    random.Random(0).shuffle(pairs)
    fresh = build(random_cloud(5, 25))
    assert {p: flow.classify(*p, fresh) for p in pairs} == first


def test_g_examples(unit):
    for p in UNIT:
        assert flow.g_at(p, unit) == 0.0
    assert flow.g_at((0.5, 0.5, 0.5), unit) == math.inf  # circumcenter lies outside
    reg = build(REGULAR)
    z, r2 = reg.circumsphere(T)
    assert flow.g_at(z, reg) == pytest.approx(r2, rel=1e-9)
    assert flow.g_at((5, 5, 5), unit) == math.inf


def test_g_zero_at_samples_and_peak_at_centers():
    pts = random_cloud(6, 40)
    cx = build(pts)
    assert all(flow.g_at(p, cx) == 0.0 for p in pts)
    for t in cx.tets:
        if flow.center_in_interior(t, cx):
            z, r2 = cx.circumsphere(t)
            assert flow.g_at(z, cx) == pytest.approx(r2, rel=1e-9)


def test_g_continuous_across_facets():
    cx = build(random_cloud(7, 30))
    rng = np.random.default_rng(0)
    checked = 0
    for f in cx.triangles:
        cf = [c for c in cx.cofaces(f) if c is not OMEGA]
        if len(cf) != 2 or any(cx.is_degenerate(c) for c in cf):
            continue
        (za, ra), (zb, rb) = cx.circumsphere(cf[0]), cx.circumsphere(cf[1])
        P = cx.points[list(f)]
        for w in rng.dirichlet(np.ones(3), size=100):
            x = w @ P
            ga = ra - (za - x) @ (za - x)
            gb = rb - (zb - x) @ (zb - x)
            assert ga == pytest.approx(gb, rel=1e-9, abs=1e-12)
        checked += 1
    assert checked > 10


def test_g_equals_upper_envelope():
    cx = build(random_cloud(8, 30))
    rng = np.random.default_rng(1)
    for x in rng.uniform(-0.5, 0.5, size=(200, 3)):
        a, b = flow.g_at(x, cx), flow.g_envelope(x, cx)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def _visits_are_flow_pairs(cx, cells):
    path = [c for i, c in enumerate(cells) if c is not None and (i == 0 or c != cells[i - 1])]
    for a, b in zip(path, path[1:]):
        common = tuple(sorted(set(a) & set(b)))
        if not common:
            return False
        # the trajectory may only leave a through a face that a flows into
        if not flow.flows_through(a, common, cx):
            return False
    return True


@pytest.mark.parametrize("seed", range(3))
def test_ode_oracle(seed):
    pts = random_cloud(20 + seed, 10)
    cx = build(pts)
    rng = np.random.default_rng(seed)
    tets = [t for t in cx.tets if not cx.is_degenerate(t)]
    for _ in range(100):
        t = tets[rng.integers(len(tets))]
        x0 = rng.dirichlet(np.ones(4)) @ cx.points[list(t)]
        traj, g, cells = flow.integrate_flow(cx, x0, step=0.02)
        finite = g[np.isfinite(g)]
        assert np.all(np.diff(finite) >= -1e-12)
        assert _visits_are_flow_pairs(cx, cells)


def test_acyclic_examples(unit):
    assert flow.check_acyclic(unit) == (True, None)
    edge = next(iter(flow.flow_edges(unit)))
    ok, cycle = flow.check_acyclic(unit, extra_edges=[edge[::-1]])
    assert not ok
    assert cycle[0] == cycle[-1] and set(cycle) == set(edge)


@pytest.mark.parametrize("seed", range(5))
def test_random_clouds_acyclic(seed):
    ok, cycle = flow.check_acyclic(build(random_cloud(seed, 50)))
    assert ok, cycle


def test_diagnostics_csv(unit):
    buf = io.StringIO()
    flow.write_diagnostics(unit, buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "simplex,cofaces,is_critical,significance"
    assert len(rows) == 1 + len(unit)
    assert any("omega:toward_coface" in r for r in rows)
