import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrapsurf import meshio
from wrapsurf.errors import BadParameters, IndexOutOfRange, NonFiniteCoordinate, ParseError

TET_V = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
TET_F = [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)]


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_bytes(data if isinstance(data, bytes) else data.encode())
    return p


def test_xyz_examples(tmp_path):
    pts = meshio.read_points(write(tmp_path, "a.xyz", "0 0 0\n1 0 0\n"))
    assert pts.shape == (2, 3)
    pts = meshio.read_points(write(tmp_path, "b.xyz", "# c\n\n1 2 3\n"))
    assert pts.tolist() == [[1, 2, 3]]


def test_xyz_errors(tmp_path):
    with pytest.raises(ParseError) as e:
        meshio.read_points(write(tmp_path, "a.xyz", "1 2\n"))
    assert e.value.line == 1
    with pytest.raises(ParseError) as e:
        meshio.read_points(write(tmp_path, "b.xyz", "0 0 0\n# x\n1 a 2\n"))
    assert e.value.line == 3
    with pytest.raises(NonFiniteCoordinate):
        meshio.read_points(write(tmp_path, "c.xyz", "0 0 0\nnan 1 2\n"))
    with pytest.raises(BadParameters):
        meshio.read_points(write(tmp_path, "d.obj", "0 0 0\n"))


def test_ply_ascii_points(tmp_path):
    text = ("ply\nformat ascii 1.0\ncomment hi\nelement vertex 2\n"
            "property float x\nproperty float y\nproperty float z\nproperty uchar red\n"
            "end_header\n0 1 2 255\n3 4 5 0\n")
    pts = meshio.read_points(write(tmp_path, "a.ply", text))
    assert pts.tolist() == [[0, 1, 2], [3, 4, 5]]


def test_ply_binary_points(tmp_path):
    header = ("ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
              "property double x\nproperty double y\nproperty double z\nend_header\n").encode()
    body = struct.pack("<6d", 0.5, 1, 2, 3, 4, 5.25)
    pts = meshio.read_points(write(tmp_path, "b.ply", header + body))
    assert pts.tolist() == [[0.5, 1, 2], [3, 4, 5.25]]
    with pytest.raises(ParseError) as e:
        meshio.read_points(write(tmp_path, "c.ply", header + body[:-4]))
    assert e.value.offset is not None


def test_stl_binary_size_and_layout(tmp_path):
    p = tmp_path / "t.stl"
    n = meshio.write_surface(p, TET_V, TET_F, "stl-binary")
    data = p.read_bytes()
    assert n == len(data) == 84 + 50 * 4 == 284
    assert struct.unpack_from("<I", data, 80) == (4,)
    normal = struct.unpack_from("<3f", data, 84)
    assert normal == (0.0, 0.0, -1.0)  # first face (0, 2, 1) faces down
    assert struct.unpack_from("<H", data, 84 + 48) == (0,)


def test_off_header(tmp_path):
    p = tmp_path / "t.off"
    meshio.write_surface(p, TET_V, TET_F)
    lines = p.read_text().splitlines()
    assert lines[:2] == ["OFF", "4 4 0"]
    assert lines[-1] == "3 1 2 3"


@pytest.mark.parametrize("fmt", meshio.SURFACE_FORMATS)
def test_empty_surface(tmp_path, fmt):
    p = tmp_path / "e.out"
    meshio.write_surface(p, np.zeros((0, 3)), [], fmt)
    V, T = meshio.read_surface(p, fmt)
    assert len(T) == 0


def test_index_out_of_range(tmp_path):
    with pytest.raises(IndexOutOfRange):
        meshio.write_surface(tmp_path / "x.off", TET_V, [(0, 1, 4)])


@pytest.mark.parametrize("fmt", ["off", "ply", "ply-ascii"])
def test_round_trip_indexed(tmp_path, fmt):
    rng = np.random.default_rng(0)
    V = rng.normal(size=(30, 3))
    T = [tuple(int(x) for x in rng.choice(30, 3, replace=False)) for _ in range(40)]
    p = tmp_path / "r.out"
    meshio.write_surface(p, V, T, fmt)
    V2, T2 = meshio.read_surface(p, fmt)
    assert np.array_equal(V2, V)
    assert [tuple(t) for t in T2] == T


@pytest.mark.parametrize("fmt", ["stl-binary", "stl-ascii"])
def test_round_trip_stl_soup(tmp_path, fmt):
    V = np.array(TET_V, dtype=float) * 1.1
    p = tmp_path / "r.stl"
    meshio.write_surface(p, V, TET_F, fmt)
    V2, T2 = meshio.read_surface(p, fmt)
    assert len(T2) == 4
    soup = V[np.array(TET_F)].reshape(-1, 3)
    assert np.allclose(V2, soup.astype(np.float32), rtol=0, atol=1e-7)


def test_stl_binary_is_deterministic(tmp_path):
    a, b = tmp_path / "a.stl", tmp_path / "b.stl"
    meshio.write_surface(a, TET_V, TET_F, "stl")
    meshio.write_surface(b, TET_V, TET_F, "stl")
    assert a.read_bytes() == b.read_bytes()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(*[st.floats(-1e6, 1e6)] * 3), min_size=1, max_size=20))
def test_points_round_trip(tmp_path_factory, pts):
    p = tmp_path_factory.mktemp("pts") / "p.xyz"
    meshio.write_points(p, pts)
    assert meshio.read_points(p).tolist() == [list(map(float, q)) for q in pts]


def test_compact():
    V = np.arange(30, dtype=float).reshape(10, 3)
    W, T = meshio.compact(V, [(2, 5, 7), (5, 7, 9)])
    assert T == [(0, 1, 2), (1, 2, 3)]
    assert W.tolist() == V[[2, 5, 7, 9]].tolist()


def test_sphere_sampler():
    pts = meshio.sample_sphere(500, radius=2.0)
    assert np.all(np.abs(np.linalg.norm(pts, axis=1) - 2.0) < 1e-12)
    four = meshio.sample_sphere(4)
    assert len({tuple(p) for p in four}) == 4
    a = meshio.sample_sphere(100, jitter=0.1, seed=3)
    assert a.tobytes() == meshio.sample_sphere(100, jitter=0.1, seed=3).tobytes()
    r = np.linalg.norm(a, axis=1)
    assert np.all((r >= 0.9) & (r <= 1.1))
    for bad in [dict(n=3), dict(n=10, radius=0), dict(n=10, jitter=-1), dict(n=10, jitter=1)]:
        with pytest.raises(BadParameters):
            meshio.sample_sphere(**bad)


def test_circle_torus_on_surface():
    pts = meshio.sample_torus(3, 1, 1000, seed=7)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    assert np.all(np.abs((rho - 3) ** 2 + pts[:, 2] ** 2 - 1) < 1e-12)


def _pentagon_distance(x, z, r, rotation):
    best = np.full(len(x), np.inf)
    for k in range(5):
        a0 = math.pi + 2 * math.pi * k / 5 + rotation
        a1 = a0 + 2 * math.pi / 5
        p = np.array([r * math.cos(a0), r * math.sin(a0)])
        q = np.array([r * math.cos(a1), r * math.sin(a1)])
        d = q - p
        pts = np.stack([x, z], axis=1)
        t = np.clip((pts - p) @ d / (d @ d), 0, 1)
        best = np.minimum(best, np.linalg.norm(pts - (p + t[:, None] * d), axis=1))
    return best


def test_pentagon_torus_on_pentagon():
    pts = meshio.sample_torus(3, 1, 1000, profile="pentagon")
    x = np.hypot(pts[:, 0], pts[:, 1]) - 3
    assert np.all(_pentagon_distance(x, pts[:, 2], 1.0, 0.0) < 1e-12)
    # a vertex points at the axis, so the outer side is a flat edge
    assert x.min() == pytest.approx(-1.0, abs=5e-3)
    assert x.max() <= math.cos(math.pi / 5) + 1e-12


def test_twisted_torus_rotates_profile():
    pts = meshio.sample_torus(3, 1, 1000, profile="twisted", twists=2)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    x = np.hypot(pts[:, 0], pts[:, 1]) - 3
    for k in range(len(pts)):
        d = _pentagon_distance(x[k:k + 1], pts[k:k + 1, 2], 1.0, 2 * (theta[k] % (2 * math.pi)) / 5)
        assert d[0] < 1e-12


def test_torus_determinism_and_errors():
    a = meshio.sample_torus(3, 1, 1000, seed=7)
    assert a.tobytes() == meshio.sample_torus(3, 1, 1000, seed=7).tobytes()
    assert a.tobytes() != meshio.sample_torus(3, 1, 1000, seed=8).tobytes()
    for args in [(3, -1, 100), (1, 2, 100), (3, 1, 3)]:
        with pytest.raises(BadParameters):
            meshio.sample_torus(*args)
    with pytest.raises(BadParameters):
        meshio.sample_torus(3, 1, 100, profile="square")
