"""Point cloud input, surface output, and synthetic samplers.

Readers: ``xyz`` (whitespace separated, ``#`` comments) and ``ply`` (ascii or
binary little-endian, vertex element with x, y, z).
Writers: ``off``, ``ply`` (binary little-endian), ``ply-ascii``,
``stl-binary`` (alias ``stl``) and ``stl-ascii``. STL is written as a
triangle soup with normals recomputed from the vertex order.
"""
from __future__ import annotations

import io
import math
import struct
from pathlib import Path

import numpy as np

from .errors import BadParameters, IndexOutOfRange, NonFiniteCoordinate, ParseError

__all__ = [
    "read_points",
    "write_points",
    "write_surface",
    "read_surface",
    "compact",
    "sample_sphere",
    "sample_torus",
    "SURFACE_FORMATS",
]

SURFACE_FORMATS = ("off", "ply", "ply-ascii", "stl-binary", "stl-ascii")
_ALIASES = {"stl": "stl-binary"}
_STL_HEADER = b"wrapsurf binary STL".ljust(80, b" ")

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def _infer(path, fmt, allowed):
    if fmt is None:
        fmt = Path(path).suffix.lstrip(".").lower()
    fmt = _ALIASES.get(fmt.lower(), fmt.lower())
    if fmt not in allowed:
        raise BadParameters(f"unsupported format {fmt!r}; expected one of {allowed}")
    return fmt


# ---------------------------------------------------------------------------
# points


def read_points(path, format: str | None = None) -> np.ndarray:
    """Read a point cloud as an ``(n, 3)`` float array."""
    fmt = _infer(path, format, ("xyz", "ply"))
    data = Path(path).read_bytes()
    pts = _read_xyz(data) if fmt == "xyz" else _read_ply(data)[0]
    bad = ~np.isfinite(pts).all(axis=1)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise NonFiniteCoordinate(f"non-finite coordinate in point {k}", line=k + 1 if fmt == "xyz" else None)
    return pts


def _read_xyz(data: bytes) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 3 coordinates, got {len(parts)}", line=lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(f"bad number in {line!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in rows[-1]):
            raise NonFiniteCoordinate("non-finite coordinate", line=lineno)
    return np.array(rows, dtype=float).reshape(-1, 3)


def _ply_header(data: bytes):
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise ParseError("not a PLY file", offset=0)
    body = data.index(b"\n", end) + 1
    fmt, elements = None, []
    for lineno, line in enumerate(data[:end].decode("ascii").splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0] in ("ply", "comment", "obj_info"):
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError("property before element", line=lineno)
            if parts[1] == "list":
                elements[-1][2].append((parts[4], "list", _PLY_TYPES[parts[2]], _PLY_TYPES[parts[3]]))
            else:
                elements[-1][2].append((parts[2], _PLY_TYPES[parts[1]]))
    if fmt not in ("ascii", "binary_little_endian"):
        raise ParseError(f"unsupported PLY format {fmt!r}", line=2)
    return fmt, elements, body


def _read_ply(data: bytes):
    """Return (vertices, faces) from a PLY file; faces may be empty."""
    fmt, elements, pos = _ply_header(data)
    verts = np.zeros((0, 3))
    faces = []
    if fmt == "ascii":
        lines = iter(data[pos:].decode("ascii").splitlines())
        for name, count, props in elements:
            rows = [next(lines).split() for _ in range(count)]
            if name == "vertex":
                names = [p[0] for p in props]
                try:
                    idx = [names.index(c) for c in "xyz"]
                except ValueError:
                    raise ParseError("vertex element lacks x, y, z") from None
                try:
                    verts = np.array([[float(r[i]) for i in idx] for r in rows]).reshape(-1, 3)
                except (ValueError, IndexError):
                    raise ParseError("malformed vertex row") from None
            elif name == "face":
                faces = [tuple(int(v) for v in r[1:1 + int(r[0])]) for r in rows]
        return verts, faces
    for name, count, props in elements:
        if any(p[1] == "list" for p in props):
            if len(props) != 1:
                raise ParseError("mixed list/scalar element unsupported", offset=pos)
            _, _, ct, it = props[0]
            out = []
            for _ in range(count):
                n = int(np.frombuffer(data, "<" + ct, 1, pos)[0])
                pos += np.dtype(ct).itemsize
                out.append(tuple(int(v) for v in np.frombuffer(data, "<" + it, n, pos)))
                pos += n * np.dtype(it).itemsize
            if name == "face":
                faces = out
            continue
        dt = np.dtype([(p[0], "<" + p[1]) for p in props])
        if pos + dt.itemsize * count > len(data):
            raise ParseError("truncated PLY body", offset=pos)
        arr = np.frombuffer(data, dt, count, pos)
        pos += dt.itemsize * count
        if name == "vertex":
            verts = np.stack([arr[c].astype(float) for c in "xyz"], axis=1)
    return verts, faces


def write_points(path, points) -> int:
    """Write an xyz file with round-trip exact float formatting."""
    text = "".join(f"{x!r} {y!r} {z!r}\n" for x, y, z in np.asarray(points, dtype=float).tolist())
    Path(path).write_text(text)
    return len(text.encode())


# ---------------------------------------------------------------------------
# surfaces


def compact(points, triangles):
    """Keep only referenced vertices; returns (vertices, remapped triangles)."""
    used = sorted({v for t in triangles for v in t})
    remap = {v: k for k, v in enumerate(used)}
    pts = np.asarray(points, dtype=float)[used] if used else np.zeros((0, 3))
    return pts, [tuple(remap[v] for v in t) for t in triangles]


def _normals(V, T):
    if not len(T):
        return np.zeros((0, 3))
    a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    n = np.cross(b - a, c - a)
    ln = np.linalg.norm(n, axis=1, keepdims=True)
    return np.divide(n, ln, out=np.zeros_like(n), where=ln > 0)


def write_surface(path, vertices, triangles, format: str | None = None) -> int:
    """Write an oriented triangle surface; returns the number of bytes written."""
    fmt = _infer(path, format, SURFACE_FORMATS)
    V = np.asarray(vertices, dtype=float).reshape(-1, 3)
    T = np.asarray(list(triangles), dtype=np.int64).reshape(-1, 3)
    if T.size and (T.min() < 0 or T.max() >= len(V)):
        raise IndexOutOfRange("triangle index outside the vertex array")
    buf = io.BytesIO()
    if fmt == "off":
        lines = ["OFF", f"{len(V)} {len(T)} 0"]
        lines += [f"{x!r} {y!r} {z!r}" for x, y, z in V.tolist()]
        lines += [f"3 {a} {b} {c}" for a, b, c in T.tolist()]
        buf.write(("\n".join(lines) + "\n").encode())
    elif fmt in ("ply", "ply-ascii"):
        kind = "ascii" if fmt == "ply-ascii" else "binary_little_endian"
        buf.write((f"ply\nformat {kind} 1.0\nelement vertex {len(V)}\n"
                   "property double x\nproperty double y\nproperty double z\n"
                   f"element face {len(T)}\nproperty list uchar int vertex_indices\n"
                   "end_header\n").encode())
        if kind == "ascii":
            body = [f"{x!r} {y!r} {z!r}" for x, y, z in V.tolist()]
            body += [f"3 {a} {b} {c}" for a, b, c in T.tolist()]
            buf.write(("\n".join(body) + ("\n" if body else "")).encode())
        else:
            buf.write(V.astype("<f8").tobytes())
            face = np.zeros(len(T), dtype=[("n", "u1"), ("v", "<i4", 3)])
            face["n"] = 3
            face["v"] = T
            buf.write(face.tobytes())
    elif fmt == "stl-binary":
        rec = np.zeros(len(T), dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
        rec["n"] = _normals(V, T)
        rec["v"] = V[T] if len(T) else np.zeros((0, 3, 3))
        buf.write(_STL_HEADER)
        buf.write(struct.pack("<I", len(T)))
        buf.write(rec.tobytes())
    else:
        out = ["solid wrapsurf"]
        for nrm, tri in zip(_normals(V, T).tolist(), T.tolist()):
            out.append("  facet normal {:.9e} {:.9e} {:.9e}".format(*nrm))
            out.append("    outer loop")
            for v in tri:
                out.append("      vertex {:.9e} {:.9e} {:.9e}".format(*V[v]))
            out.append("    endloop")
            out.append("  endfacet")
        out.append("endsolid wrapsurf")
        buf.write(("\n".join(out) + "\n").encode())
    data = buf.getvalue()
    Path(path).write_bytes(data)
    return len(data)


def read_surface(path, format: str | None = None):
    """Read back ``(vertices, triangles)``; STL yields an unshared soup."""
    fmt = _infer(path, format, SURFACE_FORMATS)
    data = Path(path).read_bytes()
    if fmt == "off":
        tokens = data.decode().split()
        if not tokens or tokens[0] != "OFF":
            raise ParseError("missing OFF header", line=1)
        nv, nf = int(tokens[1]), int(tokens[2])
        vals = tokens[4:]
        V = np.array(vals[:3 * nv], dtype=float).reshape(-1, 3)
        rest = vals[3 * nv:]
        T, k = [], 0
        for _ in range(nf):
            n = int(rest[k])
            T.append(tuple(int(v) for v in rest[k + 1:k + 1 + n]))
            k += n + 1
        return V, T
    if fmt.startswith("ply"):
        return _read_ply(data)
    if data[:80] == _STL_HEADER or (not data.lstrip().startswith(b"solid") and len(data) >= 84):
        (n,) = struct.unpack_from("<I", data, 80)
        if len(data) != 84 + 50 * n:
            raise ParseError("binary STL size does not match triangle count", offset=80)
        rec = np.frombuffer(data, dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")],
                            count=n, offset=84)
        V = rec["v"].reshape(-1, 3).astype(float)
        return V, [(3 * k, 3 * k + 1, 3 * k + 2) for k in range(n)]
    verts = [list(map(float, ln.split()[1:4])) for ln in data.decode().splitlines()
             if ln.strip().startswith("vertex")]
    V = np.array(verts, dtype=float).reshape(-1, 3)
    return V, [(3 * k, 3 * k + 1, 3 * k + 2) for k in range(len(V) // 3)]


# ---------------------------------------------------------------------------
# samplers

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def sample_sphere(n: int, radius: float = 1.0, jitter: float = 0.0, seed: int = 0) -> np.ndarray:
    """Fibonacci-spiral sphere sample with uniform radial jitter in [-jitter, jitter]."""
    if n < 4 or radius <= 0 or jitter < 0 or jitter >= radius:
        raise BadParameters("need n >= 4, radius > 0 and 0 <= jitter < radius")
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    rho = np.sqrt(1.0 - z * z)
    phi = _GOLDEN_ANGLE * np.arange(n)
    unit = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    unit /= np.linalg.norm(unit, axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    r = radius + (rng.uniform(-jitter, jitter, n) if jitter > 0 else 0.0)
    return unit * np.reshape(r, (-1, 1))


def _pentagon(s, r, rotation):
    """Point at perimeter fraction ``s`` of a regular pentagon (circumradius r)."""
    s = np.asarray(s) * 5.0
    k = np.floor(s)
    f = s - k
    a0 = np.pi + 2 * np.pi * k / 5 + rotation  # vertex 0 points at the axis
    a1 = a0 + 2 * np.pi / 5
    x = r * ((1 - f) * np.cos(a0) + f * np.cos(a1))
    z = r * ((1 - f) * np.sin(a0) + f * np.sin(a1))
    return x, z


def _profile(s, theta, r, profile, twists):
    """Cross-section point ``(x, z)`` at perimeter fraction ``s``."""
    if profile == "circle":
        phi = 2 * np.pi * s
        return r * np.cos(phi), r * np.sin(phi)
    rot = twists * theta / 5 if profile == "twisted" else 0.0
    return _pentagon(s, r, rot)


def sample_torus(R: float, r: float, n: int, seed: int = 0, profile: str = "circle",
                 twists: int = 1, resolution: int = 4096) -> np.ndarray:
    """Quasi-uniform sample of a torus around the z axis.

    ``profile`` is ``"circle"``, ``"pentagon"`` (regular pentagon of
    circumradius ``r`` with one vertex pointing at the axis) or
    ``"twisted"`` (that pentagon turned by ``twists`` fifths of a turn over
    one revolution).

    Points follow a golden-ratio lattice: the angle around the axis is
    ``i * 0.618...`` and the position along the cross-section is the
    inverse of the area-weighted profile distribution at ``(i + 1/2) / n``.
    ``seed`` only shifts both lattice coordinates.
    """
    if not (R > r > 0) or n < 4:
        raise BadParameters("need R > r > 0 and n >= 4")
    if profile not in ("circle", "pentagon", "twisted"):
        raise BadParameters(f"unknown profile {profile!r}")
    off = np.random.default_rng(seed).random(2)
    i = np.arange(n)
    theta = 2 * np.pi * np.mod(off[0] + i * (math.sqrt(5.0) - 1) / 2, 1.0)
    u = np.mod(off[1] + (i + 0.5) / n, 1.0)
    grid = (np.arange(resolution) + 0.5) / resolution
    # both profiles are parametrized by arc length, so the area weight is R + x
    x, _ = _profile(grid[None, :], theta[:, None], r, profile, twists)
    cdf = np.cumsum(np.broadcast_to(R + x, (n, resolution)), axis=1)
    cdf /= cdf[:, -1:]
    s = np.array([np.interp(u[k], cdf[k], grid) for k in range(n)])
    x, z = _profile(s, theta, r, profile, twists)
    rad = R + x
    return np.stack([rad * np.cos(theta), rad * np.sin(theta), z], axis=1)
