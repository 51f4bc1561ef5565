"""Exception hierarchy shared by every wrapsurf module."""


class WrapError(Exception):
    """Base class for all errors raised by wrapsurf."""


# kernel
class DegenerateSimplex(WrapError, ValueError):
    """Vertices are affinely dependent."""


class DegenerateTet(DegenerateSimplex):
    """Four points are coplanar where a proper tetrahedron is required."""


class PointOffHull(WrapError, ValueError):
    """A query point is not in the affine hull of the simplex."""


# delaunay
class DegenerateInput(WrapError, ValueError):
    """The point set cannot be tetrahedralized."""


class TooFewPoints(DegenerateInput):
    pass


class DuplicatePoint(DegenerateInput):
    def __init__(self, first, second):
        super().__init__(f"points {first} and {second} have identical coordinates")
        self.indices = (first, second)


class UnknownSimplex(WrapError, KeyError):
    pass


# flow / sculpt
class NotIncident(WrapError, ValueError):
    pass


class NotFree(WrapError, ValueError):
    pass


class NotCollapsible(WrapError, ValueError):
    pass


class NoSinks(WrapError, ValueError):
    pass


class NotMaximalSink(WrapError, ValueError):
    pass


# meshio
class ParseError(WrapError, ValueError):
    def __init__(self, message, line=None, offset=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.offset = offset


class NonFiniteCoordinate(ParseError):
    pass


class BadParameters(WrapError, ValueError):
    pass


class IndexOutOfRange(WrapError, IndexError):
    pass
