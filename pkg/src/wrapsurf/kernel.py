"""Exact geometric predicates and constructions.

Predicates are evaluated in two tiers: a floating-point determinant with a
static error bound (Shewchuk-style), then an exact fallback in Python
integers after rescaling every coordinate by a common denominator. Signs of
homogeneous polynomials do not change under positive scaling, so the integer
path is exact for any float, int or Fraction input.

Symbolic perturbation
---------------------
Ties are broken by a fixed simulation-of-simplicity schedule. Point ``i`` is
moved along the moment curve,

    p_i(eps) = p_i + eps * (t, t**2, t**3),   t = i + 1,

and a predicate's sign is the sign of the lowest-order nonzero coefficient of
its polynomial in ``eps``. Because distinct moment-curve points are never
coplanar nor cospherical, perturbed ``orient3d`` and ``in_sphere`` are never
zero for distinct identifiers, and every perturbed sign is the sign of a
genuine (infinitesimally) moved point set, so all predicates stay mutually
consistent.
"""
from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import DegenerateSimplex, DegenerateTet, PointOffHull

__all__ = [
    "Point3",
    "Sign",
    "Circumsphere",
    "LocationKind",
    "Location",
    "orient3d",
    "in_sphere",
    "perturbed_orient3d",
    "perturbed_in_sphere",
    "circumsphere",
    "circumcenter_signs",
    "perturbed_circumcenter_signs",
    "side_of_face",
    "perturbed_side_of_face",
    "locate_in_simplex",
]

_EPS = 2.0 ** -53
_O3D_ERRBOUND = (7.0 + 56.0 * _EPS) * _EPS
_ISP_ERRBOUND = (16.0 + 224.0 * _EPS) * _EPS
_FLOAT_EXACT_INT = 2 ** 53


class Point3(NamedTuple):
    x: float
    y: float
    z: float
    id: int = -1


class Sign(enum.IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1

    @classmethod
    def of(cls, value) -> "Sign":
        return cls((value > 0) - (value < 0))


class Circumsphere(NamedTuple):
    center: tuple
    squared_radius: object


class LocationKind(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


class Location(NamedTuple):
    kind: LocationKind
    face: tuple | None = None  # positions (into verts) of the carrier face


# ---------------------------------------------------------------------------
# number plumbing


def _ratio(c):
    try:
        return c.as_integer_ratio()
    except AttributeError:
        f = Fraction(c)
        return f.numerator, f.denominator


def scaled_integer_coords(points: Sequence[Sequence]) -> list[tuple[int, int, int]]:
    """Rescale coordinates by their common denominator so they become ints."""
    ratios = [tuple(_ratio(c) for c in p[:3]) for p in points]
    den = 1
    for r in ratios:
        for _, d in r:
            den = math.lcm(den, d)
    return [tuple(n * (den // d) for n, d in r) for r in ratios]


def _floatable(points) -> bool:
    for p in points:
        for c in p[:3]:
            if isinstance(c, float):
                continue
            if isinstance(c, int) and -_FLOAT_EXACT_INT < c < _FLOAT_EXACT_INT:
                continue
            return False
    return True


def _ids_of(points, ids):
    if ids is not None:
        return tuple(ids)
    try:
        return tuple(p.id for p in points)
    except AttributeError:
        raise TypeError("perturbed predicates need vertex identifiers") from None


class _EpsPoly:
    """Integer polynomial in the perturbation parameter (index = power)."""

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = c

    def __add__(self, o):
        if not isinstance(o, _EpsPoly):
            r = list(self.c)
            r[0] += o
            return _EpsPoly(r)
        a, b = self.c, o.c
        if len(a) < len(b):
            a, b = b, a
        r = list(a)
        for i, v in enumerate(b):
            r[i] += v
        return _EpsPoly(r)

    __radd__ = __add__

    def __neg__(self):
        return _EpsPoly([-v for v in self.c])

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, _EpsPoly):
            return _EpsPoly([v * o for v in self.c])
        r = [0] * (len(self.c) + len(o.c) - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(o.c):
                    r[i + j] += x * y
        return _EpsPoly(r)

    __rmul__ = __mul__

    def sign(self) -> int:
        for v in self.c:
            if v:
                return 1 if v > 0 else -1
        return 0


def _perturbed(int_pts, ids):
    out = []
    for p, i in zip(int_pts, ids):
        t = i + 1
        out.append((_EpsPoly([p[0], t]), _EpsPoly([p[1], t * t]), _EpsPoly([p[2], t * t * t])))
    return out


def _sgn(v) -> int:
    if isinstance(v, _EpsPoly):
        return v.sign()
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# orientation and in-sphere


def _orient_det(a, b, c, d):
    # Shewchuk's layout: positive when d lies below plane abc (abc ccw from above).
    adx, ady, adz = a[0] - d[0], a[1] - d[1], a[2] - d[2]
    bdx, bdy, bdz = b[0] - d[0], b[1] - d[1], b[2] - d[2]
    cdx, cdy, cdz = c[0] - d[0], c[1] - d[1], c[2] - d[2]
    return (adz * (bdx * cdy - cdx * bdy)
            + bdz * (cdx * ady - adx * cdy)
            + cdz * (adx * bdy - bdx * ady))


def _orient_float(a, b, c, d):
    adx, ady, adz = a[0] - d[0], a[1] - d[1], a[2] - d[2]
    bdx, bdy, bdz = b[0] - d[0], b[1] - d[1], b[2] - d[2]
    cdx, cdy, cdz = c[0] - d[0], c[1] - d[1], c[2] - d[2]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady)
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * abs(adz)
                 + (abs(cdxady) + abs(adxcdy)) * abs(bdz)
                 + (abs(adxbdy) + abs(bdxady)) * abs(cdz))
    bound = _O3D_ERRBOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return None


def _insphere_det(a, b, c, d, e):
    # Shewchuk's layout: positive when e is inside and abcd has his positive orientation.
    aex, aey, aez = a[0] - e[0], a[1] - e[1], a[2] - e[2]
    bex, bey, bez = b[0] - e[0], b[1] - e[1], b[2] - e[2]
    cex, cey, cez = c[0] - e[0], c[1] - e[1], c[2] - e[2]
    dex, dey, dez = d[0] - e[0], d[1] - e[1], d[2] - e[2]
    ab = aex * bey - bex * aey
    bc = bex * cey - cex * bey
    cd = cex * dey - dex * cey
    da = dex * aey - aex * dey
    ac = aex * cey - cex * aey
    bd = bex * dey - dex * bey
    abc = aez * bc - bez * ac + cez * ab
    bcd = bez * cd - cez * bd + dez * bc
    cda = cez * da + dez * ac + aez * cd
    dab = dez * ab + aez * bd + bez * da
    alift = aex * aex + aey * aey + aez * aez
    blift = bex * bex + bey * bey + bez * bez
    clift = cex * cex + cey * cey + cez * cez
    dlift = dex * dex + dey * dey + dez * dez
    return (dlift * abc - clift * dab) + (blift * cda - alift * bcd)


def _insphere_float(a, b, c, d, e):
    aex, aey, aez = a[0] - e[0], a[1] - e[1], a[2] - e[2]
    bex, bey, bez = b[0] - e[0], b[1] - e[1], b[2] - e[2]
    cex, cey, cez = c[0] - e[0], c[1] - e[1], c[2] - e[2]
    dex, dey, dez = d[0] - e[0], d[1] - e[1], d[2] - e[2]
    aexbey, bexaey = aex * bey, bex * aey
    bexcey, cexbey = bex * cey, cex * bey
    cexdey, dexcey = cex * dey, dex * cey
    dexaey, aexdey = dex * aey, aex * dey
    aexcey, cexaey = aex * cey, cex * aey
    bexdey, dexbey = bex * dey, dex * bey
    ab, bc, cd = aexbey - bexaey, bexcey - cexbey, cexdey - dexcey
    da, ac, bd = dexaey - aexdey, aexcey - cexaey, bexdey - dexbey
    abc = aez * bc - bez * ac + cez * ab
    bcd = bez * cd - cez * bd + dez * bc
    cda = cez * da + dez * ac + aez * cd
    dab = dez * ab + aez * bd + bez * da
    alift = aex * aex + aey * aey + aez * aez
    blift = bex * bex + bey * bey + bez * bez
    clift = cex * cex + cey * cey + cez * cez
    dlift = dex * dex + dey * dey + dez * dez
    det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd)
    aezp, bezp, cezp, dezp = abs(aez), abs(bez), abs(cez), abs(dez)
    abp = abs(aexbey) + abs(bexaey)
    bcp = abs(bexcey) + abs(cexbey)
    cdp = abs(cexdey) + abs(dexcey)
    dap = abs(dexaey) + abs(aexdey)
    acp = abs(aexcey) + abs(cexaey)
    bdp = abs(bexdey) + abs(dexbey)
    permanent = ((cdp * bezp + bdp * cezp + bcp * dezp) * alift
                 + (dap * cezp + acp * dezp + cdp * aezp) * blift
                 + (abp * dezp + bdp * aezp + dap * bezp) * clift
                 + (bcp * aezp + acp * bezp + abp * cezp) * dlift)
    bound = _ISP_ERRBOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return None


def orient3d(a, b, c, d) -> Sign:
    """Sign of det(b - a, c - a, d - a); positive for the right-handed unit frame."""
    pts = (a, b, c, d)
    if _floatable(pts):
        s = _orient_float(a, b, c, d)
        if s is not None:
            return Sign(-s)
    return Sign(-_sgn(_orient_det(*scaled_integer_coords(pts))))


def in_sphere(a, b, c, d, q) -> Sign:
    """Positive iff ``q`` is strictly inside the sphere through a, b, c, d.

    The sign is relative to a positively oriented tetrahedron and flips under
    odd permutations of ``a, b, c, d``.
    """
    if orient3d(a, b, c, d) == Sign.ZERO:
        raise DegenerateTet("in_sphere needs a non-coplanar tetrahedron")
    pts = (a, b, c, d, q)
    if _floatable(pts):
        s = _insphere_float(a, b, c, d, q)
        if s is not None:
            return Sign(-s)
    return Sign(-_sgn(_insphere_det(*scaled_integer_coords(pts))))


def _check_ids(ids):
    if len(set(ids)) != len(ids):
        raise DegenerateSimplex(f"repeated vertex identifiers {ids}")


def perturbed_orient3d(a, b, c, d, ids=None) -> Sign:
    """orient3d under the symbolic perturbation; never zero for distinct ids."""
    pts = (a, b, c, d)
    ids = _ids_of(pts, ids)
    _check_ids(ids)
    if _floatable(pts):
        s = _orient_float(a, b, c, d)
        if s is not None:
            return Sign(-s)
    ints = scaled_integer_coords(pts)
    s = _sgn(_orient_det(*ints))
    if s == 0:
        s = _orient_det(*_perturbed(ints, ids)).sign()
    return Sign(-s)


def perturbed_in_sphere(a, b, c, d, q, ids=None) -> Sign:
    """in_sphere under the symbolic perturbation; never zero for distinct ids.

    Exactly coplanar ``a, b, c, d`` are accepted: once perturbed they span a
    thin tetrahedron whose orientation is given by ``perturbed_orient3d``.
    """
    pts = (a, b, c, d, q)
    ids = _ids_of(pts, ids)
    _check_ids(ids)
    if _floatable(pts):
        s = _insphere_float(a, b, c, d, q)
        if s is not None:
            return Sign(-s)
    ints = scaled_integer_coords(pts)
    s = _sgn(_insphere_det(*ints))
    if s == 0:
        s = _insphere_det(*_perturbed(ints, ids)).sign()
    return Sign(-s)


# ---------------------------------------------------------------------------
# circumcenters


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _gram_system(pts):
    a = pts[0]
    us = [(p[0] - a[0], p[1] - a[1], p[2] - a[2]) for p in pts[1:]]
    gram2 = [[2 * _dot(u, v) for v in us] for u in us]
    rhs = [_dot(u, u) for u in us]
    return us, gram2, rhs


def _bary_parts(pts):
    """Barycentric numerators of the circumcenter and their common denominator.

    The circumcenter is ``a + sum(lam_k u_k)`` with ``(2 G) lam = |u|^2``;
    Cramer's rule gives each coordinate as ``num / det(2 G)``.
    """
    _, gram2, rhs = _gram_system(pts)
    det = _det(gram2)
    nums = []
    for k in range(len(rhs)):
        m = [row[:k] + [rhs[i]] + row[k + 1:] for i, row in enumerate(gram2)]
        nums.append(_det(m))
    total = nums[0]
    for v in nums[1:]:
        total = total + v
    return [det - total] + nums, det


def circumsphere(verts: Sequence[Sequence]) -> Circumsphere:
    """Smallest sphere through 2-4 affinely independent points.

    Float inputs give float results; ints and Fractions give exact Fractions.
    """
    if not 2 <= len(verts) <= 4:
        raise DegenerateSimplex("circumsphere needs 2 to 4 vertices")
    if _det(_gram_system(scaled_integer_coords(verts))[1]) == 0:
        raise DegenerateSimplex("vertices are affinely dependent")
    exact = not all(isinstance(c, float) for p in verts for c in p[:3])
    pts = [tuple(Fraction(c) if exact else float(c) for c in p[:3]) for p in verts]
    us, gram2, rhs = _gram_system(pts)
    det = _det(gram2)
    lam = []
    for k in range(len(rhs)):
        m = [row[:k] + [rhs[i]] + row[k + 1:] for i, row in enumerate(gram2)]
        lam.append(_det(m) / det)
    a = pts[0]
    off = [sum(l * u[j] for l, u in zip(lam, us)) for j in range(3)]
    center = tuple(a[j] + off[j] for j in range(3))
    r2 = off[0] * off[0] + off[1] * off[1] + off[2] * off[2]
    return Circumsphere(center, r2)


def circumcenter_signs(verts: Sequence[Sequence]) -> tuple[Sign, ...]:
    """Exact signs of the circumcenter's barycentric coordinates.

    Entry ``k`` is positive when the circumcenter lies on the same side of the
    facet opposite vertex ``k`` as vertex ``k`` itself.
    """
    nums, det = _bary_parts(scaled_integer_coords(verts))
    if det == 0:
        raise DegenerateSimplex("vertices are affinely dependent")
    sd = _sgn(det)
    return tuple(Sign(_sgn(n) * sd) for n in nums)


def perturbed_circumcenter_signs(verts, ids=None) -> tuple[Sign, ...]:
    """circumcenter_signs for the symbolically perturbed vertices.

    Also defined for exactly degenerate simplices, whose perturbed
    circumcenter escapes to infinity. A zero entry survives only when the
    perturbed polynomial vanishes identically.
    """
    ids = _ids_of(verts, ids)
    _check_ids(ids)
    ints = scaled_integer_coords(verts)
    nums, det = _bary_parts(ints)
    if det != 0 and all(n != 0 for n in nums):
        sd = _sgn(det)
        return tuple(Sign(_sgn(n) * sd) for n in nums)
    pnums, pdet = _bary_parts(_perturbed(ints, ids))
    sd = pdet.sign()
    return tuple(Sign(n.sign() * sd) for n in pnums)


def _apex_position(face_verts, coface_verts):
    if len(coface_verts) != len(face_verts) + 1:
        raise DegenerateSimplex("coface must have exactly one more vertex than face")
    keys = {tuple(p[:3]) for p in face_verts}
    extra = [k for k, p in enumerate(coface_verts) if tuple(p[:3]) not in keys]
    if len(extra) != 1:
        raise DegenerateSimplex("face is not a facet of coface")
    return extra[0]


def side_of_face(face_verts, coface_verts) -> Sign:
    """Side of aff(face), within aff(coface), holding the coface's circumcenter.

    Positive means the apex side (into the coface); zero means on the face's
    hyperplane. Exact.
    """
    k = _apex_position(face_verts, coface_verts)
    return circumcenter_signs(coface_verts)[k]


def perturbed_side_of_face(face_verts, coface_verts, ids=None) -> Sign:
    k = _apex_position(face_verts, coface_verts)
    return perturbed_circumcenter_signs(coface_verts, ids)[k]


# ---------------------------------------------------------------------------
# point location


def locate_in_simplex(p, verts: Sequence[Sequence], tol: float = 1e-9) -> Location:
    """Classify ``p`` against the closed simplex spanned by ``verts``.

    Barycentric signs are evaluated exactly on the given values. The affine
    hull membership test is exact for rational inputs and uses a relative
    tolerance ``tol`` as soon as any coordinate is a float.
    """
    floating = any(isinstance(c, float) for q in list(verts) + [p] for c in q[:3])
    pts = [tuple(Fraction(c) for c in q[:3]) for q in verts]
    x = tuple(Fraction(c) for c in p[:3])
    m = len(pts) - 1
    if m == 0:
        off2 = sum((x[j] - pts[0][j]) ** 2 for j in range(3))
        scale2 = 0
        bary = [Fraction(1)]
    else:
        a = pts[0]
        us = [tuple(q[j] - a[j] for j in range(3)) for q in pts[1:]]
        w = tuple(x[j] - a[j] for j in range(3))
        gram = [[_dot(u, v) for v in us] for u in us]
        det = _det(gram)
        if det == 0:
            raise DegenerateSimplex("vertices are affinely dependent")
        rhs = [_dot(u, w) for u in us]
        lam = []
        for k in range(m):
            mk = [row[:k] + [rhs[i]] + row[k + 1:] for i, row in enumerate(gram)]
            lam.append(_det(mk) / det)
        proj = [sum(l * u[j] for l, u in zip(lam, us)) for j in range(3)]
        off2 = sum((w[j] - proj[j]) ** 2 for j in range(3))
        scale2 = max(_dot(u, u) for u in us) + _dot(w, w)
        bary = [1 - sum(lam)] + lam
    if off2 != 0:
        if not floating or off2 > (tol * tol) * max(scale2, 1e-300):
            raise PointOffHull("point is not in the affine hull of the simplex")
    if any(b < 0 for b in bary):
        return Location(LocationKind.OUTSIDE)
    if all(b > 0 for b in bary):
        return Location(LocationKind.INTERIOR)
    return Location(LocationKind.BOUNDARY, tuple(k for k, b in enumerate(bary) if b > 0))
